import json

import numpy as np
import pytest

from oracles import gamma0_roots
from ptgpe import analysis
from ptgpe.cli import (EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, fmt, main,
                       solution_from_dict)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_ground_is_pt_symmetric(capsys):
    code, out, _ = run(capsys, "solve", "--a", "2.2", "--g", "1", "--gamma", "0.35",
                       "--branch", "ground")
    assert code == EXIT_OK
    d = json.loads(out)
    assert abs(d["im_kappa"]) < 1e-8
    assert d["diagnostics"]["pt_defect"] < 1e-6
    assert d["re_energy"] == pytest.approx(-(d["re_kappa"] ** 2 - d["im_kappa"] ** 2))


def test_negative_separation_is_usage_error(capsys):
    code, _, err = run(capsys, "solve", "--a", "-1", "--g", "1", "--gamma", "0.1")
    assert code == EXIT_USAGE
    assert "a must be positive" in err


def test_empty_gamma_range(capsys):
    code, _, err = run(capsys, "spectrum", "--gamma-min", "0.3", "--gamma-max", "0.3")
    assert code == EXIT_USAGE
    assert "gamma_max" in err


def test_numerical_failure_reports_residual(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": 2.2, "g": 1.0, "gamma": 0.05,
                               "tolerances": {"newton_max_iter": 1, "newton_tol": 1e-300}}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == EXIT_NUMERIC
    body = json.loads(out)
    assert "error" in body and "message" in body


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": 2.2, "colour": "blue"}))
    code, _, err = run(capsys, "oracle", "--config", str(cfg))
    assert code == EXIT_USAGE and "colour" in err


def test_flags_override_file():
    cfg = RunConfig.from_sources({"a": 3.0, "g": 0.5, "tolerances": {"newton_tol": 1e-9}},
                                 {"a": 2.0, "g": None, "newton_tol": 1e-11})
    assert cfg.a == 2.0 and cfg.g == 0.5
    assert cfg.tolerances == {"newton_tol": 1e-11}
    with pytest.raises(UsageError):
        RunConfig.from_sources({"tolerances": {"bogus": 1}}, {})


def test_non_numeric_config_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": "wide"}))
    code, _, _ = run(capsys, "oracle", "--config", str(cfg))
    assert code == EXIT_USAGE


def test_oracle_csv(capsys):
    code, out, _ = run(capsys, "oracle", "--a", "2.2", "--gamma", "0", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "index,re_kappa,im_kappa"
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    np.testing.assert_allclose(vals, gamma0_roots(2.2), atol=1e-10)
    assert "\r" not in out


def test_seventeen_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(float("nan")) == "null"
    assert float(fmt(np.pi)) == np.pi


def test_output_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"run{i}.json" for i in range(2)]
    for p in paths:
        assert main(["solve", "--gamma", "0.2", "--g", "1", "--branch", "excited",
                     "-o", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_json_roundtrip_reproduces_diagnostics(tmp_path, capsys):
    out = tmp_path / "sol.json"
    wf = tmp_path / "psi.csv"
    code = main(["solve", "--gamma", "0.3", "--g", "1", "--with-wavefunction",
                 "--wavefunction-csv", str(wf), "-o", str(out)])
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    sol = solution_from_dict(d)
    assert analysis.diagnose(sol).as_dict() == d["diagnostics"]
    header, *rows = wf.read_text().splitlines()
    assert header == "x,re_psi,im_psi,abs_psi"
    assert len(rows) == len(d["x"])


def test_spectrum_csv_sorted(tmp_path):
    out = tmp_path / "spectrum.csv"
    assert main(["spectrum", "--g", "1", "--gamma-min", "0", "--gamma-max", "0.1",
                 "-o", str(out)]) == EXIT_OK
    header, *rows = out.read_text().splitlines()
    assert header == "gamma,branch_label,re_kappa,im_kappa,residual,pt_defect"
    keys = [(r.split(",")[1], float(r.split(",")[0])) for r in rows]
    assert keys == sorted(keys)
    assert {k[0] for k in keys} == {"ground_real", "excited_real"}
