"""Domain types for the PT-symmetric double-delta Gross-Pitaevskii problem.

The stationary equation solved throughout the package is::

    -psi'' - [(1 + i*gamma) delta(x + b) + (1 - i*gamma) delta(x - b)] psi
        - g N[psi] psi = -kappa^2 psi,          b = a/2, Re(kappa) > 0,

with ``N[psi] = |psi(x)|^2`` (modulus-squared mode) or
``N[psi] = psi(x) psi(-x)`` (analytically continued mode).

With the overall minus sign the imaginary potential is ``-gamma`` at ``x=-b``
and ``+gamma`` at ``x=+b``: the trap at ``-b`` removes atoms (loss), the trap
at ``+b`` injects them (gain).
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Invalid physical parameters or solver settings."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NonlinearityMode(str, enum.Enum):
    MODULUS_SQUARED = "modulus_squared"
    ANALYTIC_CONTINUED = "analytic_continued"


class BranchLabel(str, enum.Enum):
    GROUND_REAL = "ground_real"
    EXCITED_REAL = "excited_real"
    BROKEN_DECAYING = "broken_decaying"
    BROKEN_GROWING = "broken_growing"
    CONTINUED_PLUS = "continued_plus"
    CONTINUED_MINUS = "continued_minus"


LOSS_SIDE = -1  # sign of the trap position carrying the loss for gamma > 0


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration: trap separation, gain/loss, nonlinearity."""

    a: float
    gamma: float
    g: float
    mode: NonlinearityMode = NonlinearityMode.MODULUS_SQUARED

    @property
    def b(self) -> float:
        return self.a / 2

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs.  ``x_max=None`` means ``a/2 + 25``."""

    x_max: float | None = None
    ode_rel_tol: float = 1e-12
    ode_abs_tol: float = 1e-14
    grid_step: float = 0.01
    newton_tol: float = 1e-10
    newton_max_iter: int = 40
    fd_step: float = 1e-7
    damping_min: float = 2.0 ** -20
    continuation_step: float = 0.01
    continuation_step_min: float = 1e-6

    def replace(self, **changes) -> "SolverSettings":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ShootingVector:
    """Unknowns of the root search: psi(0), psi'(0) and kappa.

    In modulus-squared mode the phase is fixed by a real psi(0), so
    ``psi0_im`` is not an unknown and five reals remain active.
    """

    psi0_re: float
    psi0_im: float
    dpsi0_re: float
    dpsi0_im: float
    kappa_re: float
    kappa_im: float

    @classmethod
    def from_complex(cls, psi0, dpsi0, kappa) -> "ShootingVector":
        psi0, dpsi0, kappa = complex(psi0), complex(dpsi0), complex(kappa)
        return cls(psi0.real, psi0.imag, dpsi0.real, dpsi0.imag, kappa.real, kappa.imag)

    @classmethod
    def from_array(cls, arr) -> "ShootingVector":
        return cls(*(float(v) for v in arr))

    @property
    def psi0(self) -> complex:
        return complex(self.psi0_re, self.psi0_im)

    @property
    def dpsi0(self) -> complex:
        return complex(self.dpsi0_re, self.dpsi0_im)

    @property
    def kappa(self) -> complex:
        return complex(self.kappa_re, self.kappa_im)

    def as_array(self) -> np.ndarray:
        return np.array([self.psi0_re, self.psi0_im, self.dpsi0_re, self.dpsi0_im,
                         self.kappa_re, self.kappa_im])

    def pt_reflected(self) -> "ShootingVector":
        """Initial data of conj(psi(-x)) with kappa -> conj(kappa)."""
        return ShootingVector.from_complex(self.psi0.conjugate(),
                                           -self.dpsi0.conjugate(),
                                           self.kappa.conjugate())


@dataclass(frozen=True)
class Solution:
    """A converged stationary state sampled on a symmetric grid."""

    params: SystemParams
    kappa: complex
    x: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    residual_norm: float
    pt_defect: float
    norm_value: complex
    shooting: ShootingVector
    branch_label: BranchLabel | None = None
    iterations: int = 0

    @property
    def energy(self) -> complex:
        return -self.kappa ** 2

    def with_label(self, label: BranchLabel) -> "Solution":
        return dataclasses.replace(self, branch_label=label)


def validate(params: SystemParams, settings: SolverSettings | None = None):
    """Check a configuration; return ``(params, settings)`` with defaults filled.

    Raises :class:`ConfigError` listing every violation.
    """
    settings = settings or SolverSettings()
    errors = []
    if not np.isfinite(params.a) or params.a <= 0:
        errors.append("a must be positive")
    if not np.isfinite(params.gamma) or params.gamma < 0:
        errors.append("gamma must be non-negative")
    if not np.isfinite(params.g):
        errors.append("g must be finite")
    try:
        mode = NonlinearityMode(params.mode)
    except ValueError:
        errors.append(f"unknown nonlinearity mode {params.mode!r}")
        mode = params.mode
    x_max = settings.x_max
    if x_max is None and params.a > 0:
        x_max = params.a / 2 + 25.0
    if x_max is not None and params.a > 0 and not x_max > params.a / 2:
        errors.append("cutoff inside trap region: x_max must exceed a/2")
    for name in ("ode_rel_tol", "ode_abs_tol", "newton_tol", "fd_step", "grid_step",
                 "damping_min", "continuation_step", "continuation_step_min"):
        if not getattr(settings, name) > 0:
            errors.append(f"{name} must be positive")
    if settings.newton_max_iter < 1:
        errors.append("newton_max_iter must be at least 1")
    if errors:
        raise ConfigError(errors)
    return params.replace(mode=mode), settings.replace(x_max=float(x_max))


def trap_strengths(params: SystemParams):
    """Positions and complex strengths of the two delta traps, left to right."""
    b = params.a / 2
    return [(-b, complex(1.0, params.gamma)), (b, complex(1.0, -params.gamma))]
