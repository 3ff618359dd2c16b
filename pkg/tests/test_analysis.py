import numpy as np
import pytest

from oracles import sech_soliton
from ptgpe.analysis import (GridError, decay_rate, equation_residual, localization,
                            modulus_asymmetry, pt_defect)

X = np.linspace(-5, 5, 1001)


class _K:
    def __init__(self, kappa):
        self.kappa = kappa


def test_decay_rate():
    assert decay_rate(_K(0.7)) == 0
    assert decay_rate(_K(0.5 + 0.1j)) == pytest.approx(0.2)
    assert decay_rate(_K(0.5 - 0.1j)) == pytest.approx(-0.2)


def test_pt_symmetric_function():
    psi = np.exp(-X ** 2) * (1 + 0.3j * X)   # psi(-x) = conj psi(x)
    assert pt_defect(X, psi) < 1e-15
    assert modulus_asymmetry(X, psi) < 1e-15
    assert abs(localization(X, psi)) < 1e-14


def test_broken_function():
    psi = np.exp(-(X + 1) ** 2)               # sits on the left
    assert pt_defect(X, psi) > 0.5
    assert modulus_asymmetry(X, psi) > 0.5
    assert localization(X, psi) > 0


def test_asymmetric_grid_rejected():
    with pytest.raises(GridError):
        pt_defect(X + 0.01, X)
    with pytest.raises(GridError):
        localization(np.linspace(-1, 1, 10), np.ones(10))


def test_equation_residual_on_soliton():
    kappa = 0.6
    x = np.linspace(-10, 10, 2001)
    psi = sech_soliton(x, kappa)
    # no traps in range: pass b outside the grid
    r = equation_residual(x, psi, kappa, 1.0, 50.0)
    assert r < 1e-5
    assert equation_residual(x, psi, kappa + 0.01, 1.0, 50.0) > 1e-3


def test_equation_residual_skips_kinks():
    # exact free solutions on each side, with derivative kinks only at x = +-1
    x = np.linspace(-6, 6, 1201)
    kappa = 0.8
    psi = np.where(np.abs(x) < 1, np.cosh(kappa * x) / np.cosh(kappa),
                   np.exp(-kappa * (np.abs(x) - 1.0)))
    assert equation_residual(x, psi, kappa, 0.0, 1.0) < 1e-3
