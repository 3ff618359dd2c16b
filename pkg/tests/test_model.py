import numpy as np
import pytest

from ptgpe.model import (ConfigError, NonlinearityMode, ShootingVector, Solution,
                         SolverSettings, SystemParams, trap_strengths, validate)


def test_validate_fills_cutoff():
    params, settings = validate(SystemParams(2.2, 0.1, 1.0))
    assert settings.x_max == pytest.approx(1.1 + 25.0)
    assert params.mode is NonlinearityMode.MODULUS_SQUARED


def test_validate_collects_every_violation():
    with pytest.raises(ConfigError) as err:
        validate(SystemParams(-1.0, -0.1, 1.0), SolverSettings(newton_tol=0.0))
    msgs = err.value.violations
    assert "a must be positive" in msgs
    assert "gamma must be non-negative" in msgs
    assert "newton_tol must be positive" in msgs


def test_cutoff_inside_traps_rejected():
    with pytest.raises(ConfigError, match="cutoff inside trap region"):
        validate(SystemParams(2.2, 0.0, 1.0), SolverSettings(x_max=1.0))


def test_unknown_mode_rejected():
    with pytest.raises(ConfigError, match="mode"):
        validate(SystemParams(2.2, 0.0, 1.0, "cubic"))


def test_mode_string_accepted():
    params, _ = validate(SystemParams(2.2, 0.0, 1.0, "analytic_continued"))
    assert params.mode is NonlinearityMode.ANALYTIC_CONTINUED


def test_trap_strengths_loss_left():
    (xl, sl), (xr, sr) = trap_strengths(SystemParams(2.0, 0.3, 0.0))
    assert (xl, xr) == (-1.0, 1.0)
    # -Im(s) is the imaginary potential; it is negative (loss) on the left
    assert sl == 1 + 0.3j and sr == 1 - 0.3j


def test_shooting_vector_roundtrip():
    sv = ShootingVector.from_complex(0.3 + 0.1j, -0.2 + 0.4j, 0.6 + 0.05j)
    assert ShootingVector.from_array(sv.as_array()) == sv
    assert sv.psi0 == 0.3 + 0.1j and sv.dpsi0 == -0.2 + 0.4j and sv.kappa == 0.6 + 0.05j


def test_pt_reflection_is_involution():
    sv = ShootingVector.from_complex(0.3 + 0.1j, -0.2 + 0.4j, 0.6 + 0.05j)
    ref = sv.pt_reflected()
    assert ref.kappa == np.conj(sv.kappa)
    assert ref.dpsi0 == -np.conj(sv.dpsi0)
    assert ref.pt_reflected() == sv


def test_energy_and_label():
    sol = Solution(SystemParams(1.0, 0.0, 0.0), 0.5 + 0.1j, np.zeros(3), np.zeros(3), 0.0, 0.0,
                   1.0, ShootingVector(0, 0, 0, 0, 0.5, 0.1))
    assert sol.energy == pytest.approx(-(0.5 + 0.1j) ** 2)
    assert sol.with_label("ground_real").branch_label == "ground_real"
