"""Symmetry, localization and equation-residual diagnostics of a solution."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from .model import NonlinearityMode


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Diagnostics:
    pt_defect: float
    modulus_asymmetry: float
    localization: float
    eq_residual: float
    im_psi0: float

    def as_dict(self):
        return asdict(self)


def _check_symmetric(x):
    x = np.asarray(x, dtype=float)
    if len(x) % 2 == 0 or not np.allclose(x, -x[::-1], rtol=0, atol=1e-12):
        raise GridError("grid is not symmetric about x = 0")
    return len(x) // 2


def pt_defect(x, psi) -> float:
    """max |psi(x) - conj(psi(-x))| over the grid."""
    _check_symmetric(x)
    psi = np.asarray(psi)
    return float(np.max(np.abs(psi - np.conj(psi[::-1]))))


def modulus_asymmetry(x, psi) -> float:
    _check_symmetric(x)
    mod = np.abs(np.asarray(psi))
    return float(np.max(np.abs(mod - mod[::-1])))


def localization(x, psi) -> float:
    """Mass on the loss side (x < 0) minus mass on the gain side (x > 0)."""
    mid = _check_symmetric(x)
    x = np.asarray(x, dtype=float)
    dens = np.abs(np.asarray(psi)) ** 2
    left = simpson(dens[:mid + 1], x=x[:mid + 1])
    right = simpson(dens[mid:], x=x[mid:])
    return float(left - right)


def equation_residual(x, psi, kappa, g, b, mode=NonlinearityMode.MODULUS_SQUARED,
                      exclude=1e-9) -> float:
    """Largest pointwise defect of the stationary equation away from the traps.

    ``psi''`` is taken from three-point differences (non-uniform stencil
    where the spacing changes); stencils touching ``x = +-b`` and the two
    end points are skipped.
    """
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    hl = x[1:-1] - x[:-2]
    hr = x[2:] - x[1:-1]
    d2 = 2 * (psi[2:] * hl - psi[1:-1] * (hl + hr) + psi[:-2] * hr) / (hl * hr * (hl + hr))
    mid = psi[1:-1]
    if NonlinearityMode(mode) is NonlinearityMode.ANALYTIC_CONTINUED:
        dens = (psi * psi[::-1])[1:-1]
    else:
        dens = np.abs(mid) ** 2
    defect = np.abs(-d2 - g * dens * mid + complex(kappa) ** 2 * mid)
    near = np.zeros(len(mid), dtype=bool)
    for p in (-b, b):
        near |= (x[:-2] <= p + exclude) & (x[2:] >= p - exclude)
    return float(np.max(defect[~near]))


def decay_rate(sol) -> float:
    """``2 Im(kappa^2)``: initial decay rate of |psi|^2 (negative means growth)."""
    k = complex(sol.kappa)
    return 2 * (k * k).imag


def diagnose(sol) -> Diagnostics:
    x, psi = sol.x, sol.psi
    mid = _check_symmetric(x)
    p = sol.params
    return Diagnostics(
        pt_defect=pt_defect(x, psi),
        modulus_asymmetry=modulus_asymmetry(x, psi),
        localization=localization(x, psi),
        eq_residual=equation_residual(x, psi, sol.kappa, p.g, p.a / 2, p.mode),
        im_psi0=float(np.imag(psi[mid])),
    )
