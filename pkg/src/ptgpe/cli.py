"""Command-line frontend: single solves, gamma scans, critical points, oracle.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
All numbers are written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .model import (BranchLabel, ConfigError, NonlinearityMode, ShootingVector, Solution,
                    SolverSettings, SystemParams, validate)
from .shooting import SolverError
from .spectrum import (LostConvergence, compute_spectrum, linear_eigenvalues, real_states)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

CONFIG_KEYS = {"a", "g", "gamma", "gamma_min", "gamma_max", "mode", "x_max", "tolerances",
               "branch", "continued", "format", "output"}
TOLERANCE_KEYS = {f.name for f in dataclasses.fields(SolverSettings)} - {"x_max"}
BRANCHES = {
    "ground": BranchLabel.GROUND_REAL,
    "excited": BranchLabel.EXCITED_REAL,
    "broken-decaying": BranchLabel.BROKEN_DECAYING,
    "broken-growing": BranchLabel.BROKEN_GROWING,
    "continued-plus": BranchLabel.CONTINUED_PLUS,
    "continued-minus": BranchLabel.CONTINUED_MINUS,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    a: float = 2.2
    g: float = 1.0
    gamma: float = 0.0
    gamma_min: float = 0.0
    gamma_max: float = 0.6
    mode: str = NonlinearityMode.MODULUS_SQUARED.value
    x_max: float | None = None
    tolerances: dict = field(default_factory=dict)
    branch: str = "ground"
    continued: bool = False
    format: str = "json"
    output: str | None = None

    @classmethod
    def from_sources(cls, file_values: dict | None, overrides: dict) -> "RunConfig":
        """File values first, then non-``None`` command-line overrides."""
        values = {}
        if file_values:
            unknown = set(file_values) - CONFIG_KEYS
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            values.update(file_values)
        tol = dict(values.get("tolerances") or {})
        for key, val in overrides.items():
            if val is None:
                continue
            if key in TOLERANCE_KEYS:
                tol[key] = val
            else:
                values[key] = val
        bad = set(tol) - TOLERANCE_KEYS
        if bad:
            raise UsageError(f"unknown tolerance keys: {', '.join(sorted(bad))}")
        values["tolerances"] = tol
        return cls(**values)

    def system(self, gamma: float | None = None, mode=None):
        try:
            mode = NonlinearityMode(mode or self.mode)
        except ValueError:
            raise ConfigError([f"unknown nonlinearity mode {self.mode!r}"])
        try:
            params = SystemParams(float(self.a), float(self.gamma if gamma is None else gamma),
                                  float(self.g), mode)
            x_max = None if self.x_max is None else float(self.x_max)
            tol = {k: type(getattr(SolverSettings, k))(v) for k, v in self.tolerances.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError([f"non-numeric value: {exc}"])
        settings = SolverSettings(x_max=x_max, **tol)
        return validate(params, settings)


# --- serialization ----------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits; non-finite values as JSON-compatible null."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return f"{x:.17g}"


def to_json(obj, indent: int = 0) -> str:
    """JSON text with every float written by :func:`fmt`; key order kept."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag], indent)
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    return json.dumps(str(obj))


def solution_to_dict(sol: Solution, wavefunction: bool = False) -> dict:
    d = analysis.diagnose(sol)
    out = {
        "a": sol.params.a,
        "g": sol.params.g,
        "gamma": sol.params.gamma,
        "mode": sol.params.mode.value,
        "branch_label": sol.branch_label.value if sol.branch_label else None,
        "re_kappa": sol.kappa.real,
        "im_kappa": sol.kappa.imag,
        "re_energy": sol.energy.real,
        "im_energy": sol.energy.imag,
        "residual": sol.residual_norm,
        "norm": [complex(sol.norm_value).real, complex(sol.norm_value).imag],
        "iterations": sol.iterations,
        "decay_rate": analysis.decay_rate(sol),
        "diagnostics": d.as_dict(),
        "shooting": list(sol.shooting.as_array()),
    }
    if wavefunction:
        out["x"] = list(sol.x)
        out["re_psi"] = list(sol.psi.real)
        out["im_psi"] = list(sol.psi.imag)
    return out


def solution_from_dict(d: dict) -> Solution:
    """Rebuild a Solution written with ``wavefunction=True``."""
    params = SystemParams(d["a"], d["gamma"], d["g"], NonlinearityMode(d["mode"]))
    kappa = complex(d["re_kappa"], d["im_kappa"])
    psi = np.array(d["re_psi"]) + 1j * np.array(d["im_psi"])
    label = BranchLabel(d["branch_label"]) if d.get("branch_label") else None
    return Solution(params=params, kappa=kappa, x=np.array(d["x"], dtype=float), psi=psi,
                    residual_norm=d["residual"], pt_defect=d["diagnostics"]["pt_defect"],
                    norm_value=complex(*d["norm"]),
                    shooting=ShootingVector.from_array(d["shooting"]),
                    branch_label=label, iterations=d["iterations"])


def wavefunction_csv(sol: Solution) -> str:
    lines = ["x,re_psi,im_psi,abs_psi"]
    for x, p in zip(sol.x, sol.psi):
        lines.append(",".join(fmt(v) for v in (x, p.real, p.imag, abs(p))))
    return "\n".join(lines) + "\n"


def spectrum_csv(branches) -> str:
    rows = []
    for label, branch in branches.items():
        for gamma, sol in branch.points:
            rows.append((label.value, gamma, sol))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["gamma,branch_label,re_kappa,im_kappa,residual,pt_defect"]
    for label, gamma, sol in rows:
        lines.append(",".join([fmt(gamma), label, fmt(sol.kappa.real), fmt(sol.kappa.imag),
                               fmt(sol.residual_norm), fmt(sol.pt_defect)]))
    return "\n".join(lines) + "\n"


# --- commands ----------------------------------------------------------------------

def find_state(cfg: RunConfig) -> Solution:
    """State on the requested branch at ``cfg.gamma``.

    Real states come from g-continuation at fixed gamma when possible;
    otherwise (and for the complex families) a gamma scan up to ``cfg.gamma``
    is run and its end point returned.
    """
    label = BRANCHES[cfg.branch]
    params, settings = cfg.system()
    if label in (BranchLabel.GROUND_REAL, BranchLabel.EXCITED_REAL):
        found = real_states(params, settings, [label])
        if label in found:
            return found[label]
    continued = label in (BranchLabel.CONTINUED_PLUS, BranchLabel.CONTINUED_MINUS)
    scan = compute_spectrum(params, 0.0, params.gamma, settings, continued=continued)
    branch = scan.branches.get(label)
    if branch is None or abs(branch.points[-1][0] - params.gamma) > 1e-12:
        raise LostConvergence(f"no {label.value} state at gamma={params.gamma}")
    return branch.last


def cmd_solve(cfg: RunConfig, wavefunction_path: str | None = None,
              with_wavefunction: bool = False):
    sol = find_state(cfg)
    if wavefunction_path:
        with open(wavefunction_path, "w", newline="\n") as fh:
            fh.write(wavefunction_csv(sol))
    return to_json(solution_to_dict(sol, with_wavefunction)) + "\n"


def cmd_wavefunction(cfg: RunConfig):
    return wavefunction_csv(find_state(cfg))


def cmd_spectrum(cfg: RunConfig):
    if not cfg.gamma_max > cfg.gamma_min:
        raise ConfigError(["gamma_max must exceed gamma_min"])
    params, settings = cfg.system(gamma=cfg.gamma_min)
    scan = compute_spectrum(params, cfg.gamma_min, cfg.gamma_max, settings, cfg.continued)
    return spectrum_csv(scan.branches)


def cmd_critical(cfg: RunConfig):
    params, settings = cfg.system(gamma=cfg.gamma_min)
    scan = compute_spectrum(params, cfg.gamma_min, cfg.gamma_max, settings)
    c = scan.critical
    if c is None or not math.isfinite(c.gamma_b):
        why = scan.info.get("gamma_cr_error") or scan.info.get("gamma_b_error") or "not found"
        raise LostConvergence(f"critical points not located: {why}")
    out = {
        "gamma_cr": c.gamma_cr,
        "gamma_b": c.gamma_b,
        "kappa_at_cr": [c.kappa_at_cr.real, c.kappa_at_cr.imag],
        "exponent_p": c.exponent_p,
        "bracket_cr": list(c.bracket_cr),
        "bracket_b": list(c.bracket_b),
        "kappa_gap": c.kappa_gap,
        "broken_parent": scan.info.get("broken_parent"),
        "tolerances": {"bisection_cr": 1e-10, "bisection_b": 1e-9,
                       "coalesce": 1e-6, "merge": 1e-6},
    }
    return to_json(out) + "\n"


def cmd_oracle(cfg: RunConfig):
    params, _ = cfg.system()
    roots = linear_eigenvalues(params.a, params.gamma)
    if cfg.format == "csv":
        lines = ["index,re_kappa,im_kappa"]
        lines += [f"{i},{fmt(k.real)},{fmt(k.imag)}" for i, k in enumerate(roots)]
        return "\n".join(lines) + "\n"
    return to_json({"a": params.a, "gamma": params.gamma,
                    "kappa": [[k.real, k.imag] for k in roots]}) + "\n"


# --- argument handling --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptgpe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--a", type=float)
    common.add_argument("--g", type=float)
    common.add_argument("--mode", choices=[m.value for m in NonlinearityMode])
    common.add_argument("--x-max", dest="x_max", type=float)
    common.add_argument("--ode-rel-tol", dest="ode_rel_tol", type=float)
    common.add_argument("--ode-abs-tol", dest="ode_abs_tol", type=float)
    common.add_argument("--newton-tol", dest="newton_tol", type=float)
    common.add_argument("--grid-step", dest="grid_step", type=float)
    common.add_argument("--continuation-step", dest="continuation_step", type=float)
    common.add_argument("-o", "--output", help="write here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"])

    single = argparse.ArgumentParser(add_help=False)
    single.add_argument("--gamma", type=float)
    single.add_argument("--branch", choices=sorted(BRANCHES))

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--gamma-min", dest="gamma_min", type=float)
    scan.add_argument("--gamma-max", dest="gamma_max", type=float)

    p = sub.add_parser("solve", parents=[common, single], help="solve for one state")
    p.add_argument("--wavefunction-csv", dest="wavefunction_csv")
    p.add_argument("--with-wavefunction", action="store_true",
                   help="embed x and psi in the JSON output")
    sub.add_parser("wavefunction", parents=[common, single], help="dump psi(x) as CSV")
    p = sub.add_parser("spectrum", parents=[common, scan], help="kappa of every branch vs gamma")
    p.add_argument("--continued", action="store_true", default=None)
    sub.add_parser("critical", parents=[common, scan], help="locate gamma_b and gamma_cr")
    p = sub.add_parser("oracle", parents=[common], help="linear (g = 0) eigenvalues")
    p.add_argument("--gamma", type=float)
    return parser


def _load_file(path):
    if path is None:
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ns = vars(args).copy()
    command = ns.pop("command")
    extras = {k: ns.pop(k) for k in ("wavefunction_csv", "with_wavefunction") if k in ns}
    try:
        cfg = RunConfig.from_sources(_load_file(ns.pop("config")), ns)
        if command == "solve":
            text = cmd_solve(cfg, extras.get("wavefunction_csv"),
                             bool(extras.get("with_wavefunction")))
        elif command == "wavefunction":
            text = cmd_wavefunction(cfg)
        elif command == "spectrum":
            text = cmd_spectrum(cfg)
        elif command == "critical":
            text = cmd_critical(cfg)
        else:
            text = cmd_oracle(cfg)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (SolverError, LostConvergence) as exc:
        body = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SolverError):
            body["residual"] = exc.residual
        elif getattr(exc, "last", None) is not None:
            body["residual"] = exc.last.residual_norm
        sys.stdout.write(to_json(body) + "\n")
        return EXIT_NUMERIC
    _emit(text, cfg.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
