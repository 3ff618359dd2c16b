import numpy as np
import pytest

from oracles import gamma0_roots
from ptgpe.integrator import half_grid
from ptgpe.model import NonlinearityMode, ShootingVector, SolverSettings, SystemParams, validate
from ptgpe.shooting import (LeftDomain, NoConvergence, canonical_gauge, fd_jacobian,
                            match_index, newton_solve, residual)
from ptgpe.spectrum import seed_from_linear

A = 2.2


def _setup(gamma=0.0, g=0.0, mode=NonlinearityMode.MODULUS_SQUARED):
    return validate(SystemParams(A, gamma, g, mode), SolverSettings())


def test_exact_linear_state_has_zero_residual():
    params, settings = _setup()
    kg, _ = gamma0_roots(A)
    r = residual(seed_from_linear(A, 0.0, kg), params, settings)
    assert r.shape == (5,)
    assert np.max(np.abs(r)) < 1e-8


@pytest.mark.parametrize("which", [0, 1])
def test_newton_recovers_linear_roots(which):
    params, settings = _setup()
    kappa = gamma0_roots(A)[which]
    exact = seed_from_linear(A, 0.0, kappa)
    start = ShootingVector.from_array(exact.as_array() * (1 + 0.03 * np.arange(1, 7) / 6))
    sol = newton_solve(start, params, settings)
    assert abs(sol.kappa - kappa) < 1e-8
    assert sol.residual_norm < settings.newton_tol


def test_odd_state_has_node_at_origin():
    params, settings = _setup()
    _, ke = gamma0_roots(A)
    sol = newton_solve(seed_from_linear(A, 0.0, ke), params, settings)
    assert abs(sol.shooting.psi0) < 1e-8
    # canonical gauge for psi(0) = 0 puts psi'(0) on the positive imaginary axis
    assert sol.shooting.dpsi0.imag > 0 and abs(sol.shooting.dpsi0.real) < 1e-8


def test_nonpositive_kappa_rejected():
    params, settings = _setup()
    sv = ShootingVector.from_complex(0.5, 0.0, -0.1)
    with pytest.raises(LeftDomain):
        residual(sv, params, settings)
    with pytest.raises(LeftDomain):
        newton_solve(sv, params, settings)


def test_non_finite_guess_rejected():
    params, settings = _setup()
    with pytest.raises(NoConvergence):
        newton_solve(ShootingVector.from_complex(np.nan, 0.0, 0.5), params, settings)


def test_fd_jacobian_matches_analytic():
    settings = SolverSettings(fd_step=1e-7)

    def func(v):
        return np.array([v[0] ** 2 + v[4], np.sin(v[2]) * v[5], np.exp(v[1]) - v[3]])

    x0 = np.array([0.3, -0.2, 1.1, 0.4, 0.7, -0.5])
    exact = np.array([
        [2 * x0[0], 0, 0, 0, 1, 0],
        [0, 0, np.cos(x0[2]) * x0[5], 0, 0, np.sin(x0[2])],
        [0, np.exp(x0[1]), 0, -1, 0, 0],
    ])
    jac = fd_jacobian(ShootingVector.from_array(x0), None, settings, func=func)
    np.testing.assert_allclose(jac, exact, atol=1e-6)


def test_canonical_gauge_makes_psi0_real_positive():
    sv = ShootingVector.from_complex(-0.3 + 0.4j, 0.1 - 0.2j, 0.6)
    out = canonical_gauge(sv, NonlinearityMode.MODULUS_SQUARED)
    assert out.psi0.imag == 0 and out.psi0.real == pytest.approx(0.5)
    # a global phase leaves the ratio psi'(0)/psi(0) unchanged
    assert out.dpsi0 / out.psi0 == pytest.approx(sv.dpsi0 / sv.psi0)
    assert out.kappa == sv.kappa


def test_canonical_gauge_continued_only_flips_sign():
    sv = ShootingVector.from_complex(-0.3 + 0.1j, 0.1 - 0.2j, 0.6 + 0.1j)
    out = canonical_gauge(sv, NonlinearityMode.ANALYTIC_CONTINUED)
    assert out.psi0 == -sv.psi0 and out.dpsi0 == -sv.dpsi0


@pytest.mark.parametrize("kappa", [0.05, 0.3, 0.9, 3.0])
def test_match_index_inside_grid(kappa):
    params, settings = _setup()
    t, itrap = half_grid(A / 2, settings.x_max, settings.grid_step)
    im = match_index(kappa, params, settings)
    assert itrap + 2 <= im <= len(t) - 1
    if kappa > 0.3:
        assert t[im] - t[itrap] == pytest.approx(4.0 / kappa, abs=2 * settings.grid_step)


def test_pt_symmetric_state_solves_continued_system():
    # for psi(-x) = conj(psi(x)) the two norms coincide
    params, settings = _setup(gamma=0.2, g=1.0)
    kg, _ = gamma0_roots(A)
    sol = newton_solve(seed_from_linear(A, 0.0, kg), params.replace(gamma=0.0), settings)
    sol = newton_solve(sol.shooting, params, settings)
    assert sol.pt_defect < 1e-8
    cparams = params.replace(mode=NonlinearityMode.ANALYTIC_CONTINUED)
    r = residual(sol.shooting, cparams, settings)
    assert r.shape == (6,)
    assert np.max(np.abs(r)) < 1e-8
