"""Shooting integration of the stationary equation across the two traps.

Integration always runs outward from ``x = 0``.  The half axis ``x < 0`` is
handled through ``phi(t) = psi(-t)``, which obeys the same equation with the
left trap (strength ``1 + i*gamma``) at ``t = +b``.  In the analytically
continued mode the pair ``u(x) = psi(x)``, ``v(x) = psi(-x)`` is integrated
together on ``x >= 0``, since the nonlinearity couples the two half axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .model import NonlinearityMode, SolverSettings, SystemParams


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OdeState:
    x: float
    psi: complex
    dpsi: complex
    psi_mirror: complex | None = None
    dpsi_mirror: complex | None = None

    @property
    def continued(self) -> bool:
        return self.psi_mirror is not None


@dataclass(frozen=True)
class HalfAxis:
    """Samples of one outward integration.

    ``x`` runs from 0 to ``direction * x_max``; ``psi``/``dpsi`` are the
    wavefunction and its x-derivative there (after the jump at the trap).
    In continued mode ``mirror``/``dmirror`` hold ``psi(-x)`` and its
    derivative with respect to ``x`` of that function.
    """

    x: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    itrap: int
    status: int
    mirror: np.ndarray | None = None
    dmirror: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == kernels.STATUS_OK

    @property
    def end(self) -> OdeState:
        if self.mirror is None:
            return OdeState(float(self.x[-1]), complex(self.psi[-1]), complex(self.dpsi[-1]))
        return OdeState(float(self.x[-1]), complex(self.psi[-1]), complex(self.dpsi[-1]),
                        complex(self.mirror[-1]), complex(self.dmirror[-1]))


def half_grid(b: float, x_max: float, h: float = 0.01):
    """Outward grid ``0 .. x_max`` with ``b`` as a node; returns ``(t, itrap)``.

    Each of the two segments is split into an even number of equal intervals
    no wider than ``h``.
    """
    def nodes(length):
        n = max(2, int(np.ceil(length / h - 1e-9)))
        return n + (n % 2)

    n1, n2 = nodes(b), nodes(x_max - b)
    t = np.concatenate([np.linspace(0.0, b, n1 + 1),
                        np.linspace(b, x_max, n2 + 1)[1:]])
    return t, n1


def rhs_standard(state: OdeState, kappa: complex, g: float):
    """Derivatives ``(psi', psi'')`` with the modulus-squared nonlinearity."""
    psi = complex(state.psi)
    n2 = psi.real ** 2 + psi.imag ** 2
    return complex(state.dpsi), kappa ** 2 * psi - g * n2 * psi


def rhs_continued(state: OdeState, kappa: complex, g: float):
    """Derivatives ``(u', u'', v', v'')`` of the coupled mirror system."""
    u, v = complex(state.psi), complex(state.psi_mirror)
    k2 = kappa ** 2
    return (complex(state.dpsi), k2 * u - g * u * u * v,
            complex(state.dpsi_mirror), k2 * v - g * v * v * u)


def apply_delta_jump(state: OdeState, params: SystemParams, tol: float = 1e-12) -> OdeState:
    """Cross the trap at ``state.x`` in the +x direction.

    The derivative jumps by ``-s * psi`` where ``s`` is the trap strength.
    The mirror component, which samples the other trap, gets the strength of
    the trap at ``-state.x``.
    """
    b = params.a / 2
    if abs(abs(state.x) - b) > tol:
        raise IntegrationError(f"x = {state.x} is not a trap position (+-{b})")
    s_here = complex(1.0, -params.gamma) if state.x > 0 else complex(1.0, params.gamma)
    dpsi = state.dpsi - s_here * state.psi
    if not state.continued:
        return OdeState(state.x, state.psi, dpsi)
    s_mirror = s_here.conjugate()
    return OdeState(state.x, state.psi, dpsi, state.psi_mirror,
                    state.dpsi_mirror - s_mirror * state.psi_mirror)


def integrate_half_axis(start: OdeState, params: SystemParams, kappa: complex,
                        direction: int, settings: SolverSettings,
                        strengths=None, nodes: int | None = None) -> HalfAxis:
    """Integrate from ``x = 0`` to ``direction * x_max``.

    ``strengths`` overrides the trap strengths (``(s_u, s_v)``); pass
    ``(0, 0)`` for the free equation.  ``nodes`` truncates the outward grid
    to its first ``nodes`` points.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    b = params.a / 2
    t, itrap = half_grid(b, settings.x_max, settings.grid_step)
    if nodes is not None:
        t = t[:nodes]
    s_right, s_left = complex(1.0, -params.gamma), complex(1.0, params.gamma)
    if start.continued:
        if direction != 1:
            raise ValueError("continued mode integrates along +x only")
        s_u, s_v = (s_right, s_left) if strengths is None else strengths
        u, du, v, dv, status = kernels.shoot_continued(
            start.psi, start.dpsi, start.psi_mirror, start.dpsi_mirror, kappa,
            params.g, s_u, s_v, t, itrap, settings.ode_rel_tol, settings.ode_abs_tol)
        return HalfAxis(t, u, du, itrap, status, v, dv)
    if strengths is None:
        s = s_right if direction == 1 else s_left
    else:
        s = strengths[0]
    u, du, status = kernels.shoot_standard(
        start.psi, direction * start.dpsi, kappa, params.g, s, t, itrap,
        settings.ode_rel_tol, settings.ode_abs_tol)
    return HalfAxis(direction * t, u, direction * du, itrap, status)


def tail_rate(kappa: complex, g: float, density: complex,
              mode=NonlinearityMode.MODULUS_SQUARED) -> complex:
    """Local decay rate ``q`` (``psi' = -q psi``) of the outer solution.

    ``density`` is ``|psi|^2`` (or ``psi(x) psi(-x)`` in continued mode) at the
    point.  For real kappa, ``q = sqrt(kappa^2 - g*density/2)`` is exact on the
    decaying free solution (the first integral of the sech tail).  For
    complex kappa the modulus-squared tail satisfies
    ``q = kappa - g*density/(2(kappa + Re kappa)) + O(density^2)``, which the
    expression used here reproduces while staying exact at real kappa.
    """
    kappa = complex(kappa)
    if NonlinearityMode(mode) is NonlinearityMode.ANALYTIC_CONTINUED:
        q2 = kappa ** 2 - 0.5 * g * complex(density)
    else:
        q2 = kappa ** 2 - g * complex(density) * kappa / (kappa + kappa.real)
    q = np.sqrt(q2)
    return q if q.real >= 0 else -q


def tail_norm(kappa: complex, g: float, density: complex,
              mode=NonlinearityMode.MODULUS_SQUARED):
    """Integral of the density beyond a point where it equals ``density``.

    Modulus-squared mode: ``n / (Re kappa + Re q)``, equal to the exact sech
    tail ``2 (kappa - q) / g`` at real kappa and to ``n / (2 Re kappa)`` at
    ``g = 0``.  Continued mode: ``n / (kappa + q)`` (complex).
    """
    q = tail_rate(kappa, g, density, mode)
    kappa = complex(kappa)
    if NonlinearityMode(mode) is NonlinearityMode.ANALYTIC_CONTINUED:
        return complex(density) / (kappa + q)
    return float(np.real(density)) / (kappa.real + q.real)


def growing_amplitude(psi_end: complex, dpsi_out: complex, q: complex, length: float) -> complex:
    """Amplitude of the growing exponential, referred back a distance ``length``.

    ``dpsi_out`` is the derivative along the outward direction.
    """
    return (dpsi_out + q * psi_end) / (2 * q) * np.exp(-q * length)


def _pieces(x, breaks):
    cuts = sorted({0} | {int(i) for i in breaks} | {len(x) - 1})
    return [(cuts[k], cuts[k + 1]) for k in range(len(cuts) - 1) if cuts[k + 1] > cuts[k]]


def norm_integral(x, psi, mode=NonlinearityMode.MODULUS_SQUARED, kappa=None,
                  breakpoints=(), g=0.0):
    """Norm of sampled ``psi`` over the symmetric grid ``x``.

    Modulus-squared mode returns ``int |psi|^2 dx`` (real); continued mode
    returns the complex ``int psi(x) psi(-x) dx``.  Quadrature is Simpson on
    each piece between ``x = 0`` and the given breakpoints (the trap
    positions).  With ``kappa`` given, the tails beyond the grid are added
    with :func:`tail_norm`.
    """
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if np.any(np.diff(x) <= 0):
        raise IntegrationError("grid must be strictly increasing")
    mode = NonlinearityMode(mode)
    if mode is NonlinearityMode.MODULUS_SQUARED:
        dens = psi.real ** 2 + psi.imag ** 2
    else:
        if not np.allclose(x, -x[::-1], rtol=0, atol=1e-12):
            raise IntegrationError("continued-mode overlap needs a symmetric grid")
        dens = psi * psi[::-1]
    idx = [int(np.argmin(abs(x - p))) for p in (0.0, *breakpoints) if x[0] < p < x[-1]]
    total = sum(simpson(dens[i:j + 1], x=x[i:j + 1]) for i, j in _pieces(x, idx))
    if kappa is not None:
        total += tail_norm(kappa, g, dens[0], mode) + tail_norm(kappa, g, dens[-1], mode)
    if mode is NonlinearityMode.MODULUS_SQUARED:
        return float(np.real(total))
    return complex(total)


def assemble(left: HalfAxis, right: HalfAxis):
    """Join outward integrations into ``(x, psi)`` on ``[-x_max, x_max]``."""
    x = np.concatenate([left.x[::-1], right.x[1:]])
    psi = np.concatenate([left.psi[::-1], right.psi[1:]])
    return x, psi


def assemble_continued(half: HalfAxis):
    x = np.concatenate([-half.x[::-1], half.x[1:]])
    psi = np.concatenate([half.mirror[::-1], half.psi[1:]])
    return x, psi
