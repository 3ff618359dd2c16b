import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from oracles import sech_soliton
from ptgpe.integrator import (IntegrationError, OdeState, apply_delta_jump, assemble,
                              growing_amplitude, half_grid, integrate_half_axis,
                              norm_integral, rhs_continued, rhs_standard, tail_norm, tail_rate)
from ptgpe.model import NonlinearityMode, SolverSettings, SystemParams, validate
from ptgpe.spectrum import linear_eigenvalues, linear_state

A = 2.2


def _setup(gamma=0.0, g=0.0, **kw):
    return validate(SystemParams(A, gamma, g), SolverSettings(**kw))


def test_half_grid_contains_trap_and_even_segments():
    t, itrap = half_grid(1.1, 26.1, 0.01)
    assert t[0] == 0 and t[-1] == pytest.approx(26.1)
    assert t[itrap] == pytest.approx(1.1)
    assert itrap % 2 == 0 and (len(t) - 1 - itrap) % 2 == 0
    assert np.all(np.diff(t) <= 0.01 + 1e-12)


@pytest.mark.parametrize("kappa, x_max", [(0.3, 20.0), (0.5, 20.0), (1.2, 8.0)])
def test_soliton(kappa, x_max):
    # outward integration amplifies errors by exp(kappa x); keep kappa x_max moderate
    params, settings = _setup(g=1.0, x_max=x_max)
    half = integrate_half_axis(OdeState(0.0, np.sqrt(2) * kappa, 0.0), params, kappa, 1,
                               settings, strengths=(0, 0))
    assert half.ok
    assert np.max(np.abs(half.psi - sech_soliton(half.x, kappa))) < 1e-8


def test_negative_direction_mirrors_free_solution():
    params, settings = _setup(g=1.0, x_max=10.0)
    start = OdeState(0.0, np.sqrt(2) * 0.5, 0.0)
    right = integrate_half_axis(start, params, 0.5, 1, settings, strengths=(0, 0))
    left = integrate_half_axis(start, params, 0.5, -1, settings, strengths=(0, 0))
    assert np.allclose(left.x, -right.x)
    assert np.allclose(left.psi, right.psi, atol=1e-13)
    assert np.allclose(left.dpsi, -right.dpsi, atol=1e-13)


@pytest.mark.parametrize("gamma", [0.0, 0.2, 0.38, 0.5])
def test_linear_eigenfunction_reproduced(gamma):
    """At g = 0 the integrator must follow the exact piecewise exponentials."""
    params, settings = _setup(gamma=gamma, x_max=6.0)
    for kappa in linear_eigenvalues(A, gamma)[:2]:
        psi0, dpsi0, exact = linear_state(A, gamma, kappa)
        for d in (1, -1):
            half = integrate_half_axis(OdeState(0.0, psi0, dpsi0), params, kappa, d, settings)
            assert half.ok
            assert np.max(np.abs(half.psi - exact(half.x))) < 1e-9


def test_jump_condition():
    params = SystemParams(A, 0.3, 0.0)
    st = OdeState(1.1, 0.5 + 0.1j, -0.2j)
    out = apply_delta_jump(st, params)
    assert out.psi == st.psi
    assert out.dpsi - st.dpsi == pytest.approx(-(1 - 0.3j) * st.psi)
    left = apply_delta_jump(OdeState(-1.1, 0.5, 0.1), params)
    assert left.dpsi - 0.1 == pytest.approx(-(1 + 0.3j) * 0.5)


def test_jump_on_mirror_uses_other_trap():
    params = SystemParams(A, 0.3, 1.0)
    st = OdeState(1.1, 0.5, 0.0, 0.4, 0.0)
    out = apply_delta_jump(st, params)
    assert out.dpsi == pytest.approx(-(1 - 0.3j) * 0.5)
    assert out.dpsi_mirror == pytest.approx(-(1 + 0.3j) * 0.4)


def test_jump_off_trap_raises():
    with pytest.raises(IntegrationError):
        apply_delta_jump(OdeState(0.3, 1.0, 0.0), SystemParams(A, 0.0, 0.0))


def test_rhs():
    st = OdeState(0.0, 1 + 1j, 0.5)
    d1, d2 = rhs_standard(st, 0.5, 2.0)
    assert d1 == 0.5 and d2 == pytest.approx(0.25 * (1 + 1j) - 2 * 2 * (1 + 1j))
    st = OdeState(0.0, 1.0, 0.1, 2.0, 0.2)
    out = rhs_continued(st, 1.0, 1.0)
    assert out == pytest.approx((0.1, 1 - 2, 0.2, 2 - 4))


def test_continued_matches_standard_on_pt_symmetric_data():
    """u = psi(x), v = psi(-x) integrated together equals two standard runs."""
    params, settings = _setup(gamma=0.2, g=1.0, x_max=5.0)
    kappa = 0.7
    psi0, dpsi0 = 0.4, -0.1j
    std_r = integrate_half_axis(OdeState(0.0, psi0, dpsi0), params, kappa, 1, settings)
    std_l = integrate_half_axis(OdeState(0.0, psi0, dpsi0), params, kappa, -1, settings)
    cont_params = params.replace(mode=NonlinearityMode.ANALYTIC_CONTINUED)
    # for PT-symmetric data psi(-x) = conj psi(x), so u v = |psi|^2 on the grid
    cont = integrate_half_axis(OdeState(0.0, psi0, dpsi0, psi0, -dpsi0), cont_params, kappa,
                               1, settings)
    assert np.max(np.abs(cont.psi - std_r.psi)) < 1e-9
    assert np.max(np.abs(cont.mirror - std_l.psi)) < 1e-9


def test_blowup_reported():
    params, settings = _setup(g=-1.0, x_max=30.0)
    half = integrate_half_axis(OdeState(0.0, 1.0, 1.0), params, 1.0, 1, settings,
                               strengths=(0, 0))
    assert not half.ok
    assert np.isnan(half.psi[-1])


def test_tail_rate_exact_on_soliton_tail():
    kappa, x = 0.6, 3.0
    psi = sech_soliton(x, kappa)
    dpsi = -kappa * np.tanh(kappa * x) * psi
    q = tail_rate(kappa, 1.0, psi ** 2)
    assert q == pytest.approx(-dpsi / psi, rel=1e-12)


def test_tail_norm_exact_on_soliton_tail():
    kappa, x0 = 0.6, 2.5
    exact, _ = quad(lambda x: sech_soliton(x, kappa) ** 2, x0, 80.0, epsabs=1e-15, limit=200)
    assert tail_norm(kappa, 1.0, sech_soliton(x0, kappa) ** 2) == pytest.approx(exact, rel=1e-10)
    assert tail_norm(0.5 + 0.2j, 0.0, 0.3) == pytest.approx(0.3)  # n / (2 Re kappa)


def test_growing_amplitude_isolates_growing_part():
    q, L = 0.7, 4.0
    x = 5.0
    a_dec, a_grow = 0.3, 1e-3
    psi = a_dec * np.exp(-q * x) + a_grow * np.exp(q * x)
    dpsi = -q * a_dec * np.exp(-q * x) + q * a_grow * np.exp(q * x)
    assert growing_amplitude(psi, dpsi, q, 0.0) == pytest.approx(a_grow * np.exp(q * x))
    assert growing_amplitude(psi, dpsi, q, L) == pytest.approx(a_grow * np.exp(q * (x - L)))


def test_norm_integral_fourth_order():
    """Simpson error drops by ~16 when the step halves."""
    errs = []
    exact = (np.exp(2.0) - 1) / 2
    for n in (11, 21, 41):
        x = np.linspace(0.0, 1.0, n)
        errs.append(abs(norm_integral(x, np.exp(x)) - exact))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.15)


def test_norm_integral_continued_overlap():
    x = np.linspace(-3, 3, 601)
    psi = np.exp(-x ** 2) * (1 + 0.5j * x)
    val = norm_integral(x, psi, NonlinearityMode.ANALYTIC_CONTINUED)
    ref = trapezoid(psi * psi[::-1], x=x)
    assert abs(val - ref) < 1e-5
    with pytest.raises(IntegrationError):
        norm_integral(x[:-1], psi[:-1], NonlinearityMode.ANALYTIC_CONTINUED)


def test_assemble_symmetric():
    params, settings = _setup(x_max=3.0)
    r = integrate_half_axis(OdeState(0.0, 1.0, 0.0), params, 0.6, 1, settings)
    lft = integrate_half_axis(OdeState(0.0, 1.0, 0.0), params, 0.6, -1, settings)
    x, psi = assemble(lft, r)
    assert np.allclose(x, -x[::-1])
    assert np.allclose(psi, psi[::-1])
