"""Stationary states of a Gross-Pitaevskii equation with two PT-symmetric delta traps."""
from .kernels import BACKEND
from .model import (BranchLabel, ConfigError, NonlinearityMode, ShootingVector, Solution,
                    SolverSettings, SystemParams, validate)
from .shooting import (LeftDomain, NoConvergence, SingularJacobian, SolverError,
                       newton_solve, residual)
from .spectrum import (Branch, CriticalPoints, Spectrum, Termination, compute_spectrum,
                       continue_in_g, linear_eigenvalues, seed_from_linear, trace_branch)
from .analysis import Diagnostics, decay_rate, diagnose

__all__ = [
    "BACKEND", "BranchLabel", "ConfigError", "NonlinearityMode", "ShootingVector",
    "Solution", "SolverSettings", "SystemParams", "validate", "LeftDomain",
    "NoConvergence", "SingularJacobian", "SolverError", "newton_solve", "residual",
    "Branch", "CriticalPoints", "Spectrum", "Termination", "compute_spectrum",
    "continue_in_g", "linear_eigenvalues", "seed_from_linear", "trace_branch",
    "Diagnostics", "decay_rate", "diagnose",
]
