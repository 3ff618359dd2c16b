"""The compiled and pure-Python kernels must agree to round-off."""
import numpy as np
import pytest

from ptgpe import _kernels_py, kernels
from ptgpe.integrator import half_grid

compiled = pytest.importorskip("ptgpe._kernels")

T, ITRAP = half_grid(1.1, 6.0, 0.01)


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("g, kappa, s, amp", [(0.0, 0.6, 1.0, 0.4),
                                              (1.0, 0.7 + 0.1j, 1 - 0.3j, 0.4),
                                              (-1.0, 0.6, 1 + 0.2j, 0.05)])
def test_standard_parity(g, kappa, s, amp):
    args = (amp * (1 + 0.1j), -0.1j * amp, kappa, g, s, T, ITRAP, 1e-12, 1e-14)
    u1, du1, st1 = compiled.shoot_standard(*args)
    u2, du2, st2 = _kernels_py.shoot_standard(*args)
    assert st1 == st2 == kernels.STATUS_OK
    assert np.max(np.abs(u1 - u2)) < 1e-12
    assert np.max(np.abs(du1 - du2)) < 1e-12


def test_continued_parity():
    args = (0.4 + 0.1j, -0.1j, 0.4 - 0.1j, 0.1j, 0.6 + 0.05j, 1.0, 1 - 0.3j, 1 + 0.3j,
            T, ITRAP, 1e-12, 1e-14)
    out1 = compiled.shoot_continued(*args)
    out2 = _kernels_py.shoot_continued(*args)
    assert out1[-1] == out2[-1] == kernels.STATUS_OK
    for a, b in zip(out1[:4], out2[:4]):
        assert np.max(np.abs(a - b)) < 1e-12


def test_blowup_parity():
    t, itrap = half_grid(1.1, 40.0, 0.01)
    args = (1.0, 1.0, 1.0, -1.0, 0.0, t, itrap, 1e-12, 1e-14)
    for mod in (compiled, _kernels_py):
        u, du, status = mod.shoot_standard(*args)
        assert status == kernels.STATUS_BLOWUP
        assert np.isnan(u[-1])


def test_jump_at_first_node():
    t = np.linspace(0.0, 1.0, 11)
    for mod in (compiled, _kernels_py):
        u, du, status = mod.shoot_standard(1.0, 0.0, 1.0, 0.0, 2.0, t, 0, 1e-12, 1e-14)
        assert status == kernels.STATUS_OK
        # after the jump psi' = -2: psi = cosh x - 2 sinh x
        assert np.max(np.abs(u - (np.cosh(t) - 2 * np.sinh(t)))) < 1e-11
