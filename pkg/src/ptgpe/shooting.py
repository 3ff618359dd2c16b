"""Residual system and damped Newton root search.

Modulus-squared mode has five real unknowns (``Re psi(0)``, ``psi'(0)``,
``kappa``) and five conditions: no growing exponential at either end of the
domain (two complex conditions) and unit norm.  The continued mode adds
``Im psi(0)`` and replaces the norm by the complex condition
``int psi(x) psi(-x) dx = 1``.

The decay conditions are imposed on the amplitude of the growing solution
``(psi' + q psi) / (2q)`` at a matching point a few decay lengths past the
trap, referred back to the trap by ``exp(-q (x_m - b))``.  The outer tail is
the exact decaying solution, so unlike ``psi(x_max) = 0`` no hard wall is
imposed.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from . import analysis
from scipy.integrate import simpson

from .integrator import (OdeState, growing_amplitude, half_grid, integrate_half_axis,
                         tail_norm, tail_rate)
from .model import (BranchLabel, NonlinearityMode, ShootingVector, Solution,
                    SolverSettings, SystemParams)

log = logging.getLogger(__name__)

SENTINEL = 1e12
COND_MAX = 1e13
MATCH_DECAYS = 4.0
SHORT_MATCH_DECAYS = 2.0
# give up after this many consecutive iterations that shrink |r| by less than 10%
STALL_ITERS = 4
STALL_RATIO = 0.9


class SolverError(RuntimeError):
    """Base class for root-search failures; ``residual`` is the last norm."""

    def __init__(self, message, residual=float("nan"), last=None):
        super().__init__(message)
        self.residual = residual
        self.last = last


class NoConvergence(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class LeftDomain(SolverError):
    pass


# unknowns held fixed by the phase gauge, per gauge
_GAUGE_PSI0 = 1      # Im psi(0) = 0
_GAUGE_DPSI0 = 3     # Im psi'(0) = 0


def active_indices(mode: NonlinearityMode, gauge: int = _GAUGE_PSI0):
    if NonlinearityMode(mode) is NonlinearityMode.ANALYTIC_CONTINUED:
        return [0, 1, 2, 3, 4, 5]
    return [i for i in range(6) if i != gauge]


@dataclass
class Evaluation:
    residual: np.ndarray
    x: np.ndarray | None = None
    psi: np.ndarray | None = None
    norm_value: complex | float | None = None


def match_index(kappa: complex, params: SystemParams, settings: SolverSettings,
                decays: float = MATCH_DECAYS) -> int:
    """Grid index (on the outward half grid) of the matching point.

    The decay conditions are imposed ``MATCH_DECAYS / Re kappa`` beyond the
    trap, or at ``x_max`` if that is closer.  Further out the residual would
    gain a factor ``exp(Re kappa * distance)`` in sensitivity, which shrinks
    Newton's basin once the nonlinearity is on.
    """
    t, itrap = half_grid(params.a / 2, settings.x_max, settings.grid_step)
    kr = max(complex(kappa).real, 1e-12)
    dist = min(decays / kr, t[-1] - t[itrap])
    h = t[itrap + 1] - t[itrap]
    steps = 2 * int(np.ceil(dist / (2 * h) - 1e-9))
    return min(itrap + max(steps, 2), len(t) - 1)


def _strip_growing(psi, x, q, amp_end, start):
    """Subtract ``amp_end * exp(q (|x| - |x_end|))`` from samples past ``start``.

    Removes the exponentially growing round-off and tolerance remnant that
    outward integration picks up beyond the trap; starting there keeps the
    samples smooth across the matching point.
    """
    out = psi.copy()
    dist = np.abs(x[start:]) - abs(x[-1])
    out[start:] -= amp_end * np.exp(q * dist)
    return out


def _evaluate(sv: ShootingVector, params: SystemParams, settings: SolverSettings,
              im: int | None = None, keep: bool = False) -> Evaluation:
    kappa = sv.kappa
    mode = params.mode
    b = params.a / 2
    g = params.g
    if im is None:
        im = match_index(kappa, params, settings)
    nodes = None if keep else im + 1
    continued = mode is NonlinearityMode.ANALYTIC_CONTINUED
    if continued:
        start = OdeState(0.0, sv.psi0, sv.dpsi0, sv.psi0, -sv.dpsi0)
        halves = [integrate_half_axis(start, params, kappa, 1, settings, nodes=nodes)]
    else:
        start = OdeState(0.0, sv.psi0, sv.dpsi0)
        halves = [integrate_half_axis(start, params, kappa, d, settings, nodes=nodes)
                  for d in (1, -1)]
    if not all(h.ok for h in halves):
        return Evaluation(np.full(6 if continued else 5, SENTINEL))
    length = abs(halves[0].x[im]) - b
    if continued:
        half = halves[0]
        u, du, v, dv = half.psi[im], half.dpsi[im], half.mirror[im], half.dmirror[im]
        q = tail_rate(kappa, g, u * v, mode)
        amps = [growing_amplitude(u, du, q, length), growing_amplitude(v, dv, q, length)]
        inner = 2 * simpson(half.psi[:im + 1] * half.mirror[:im + 1], x=half.x[:im + 1])
        nv = complex(inner + 2 * tail_norm(kappa, g, u * v, mode))
        res = [amps[0].real, amps[0].imag, amps[1].real, amps[1].imag, nv.real - 1.0, nv.imag]
    else:
        amps, nv = [], 0.0
        for half, sign in zip(halves, (1, -1)):
            u, du = half.psi[im], sign * half.dpsi[im]
            dens = abs(u) ** 2
            q = tail_rate(kappa, g, dens, mode)
            amps.append(growing_amplitude(u, du, q, length))
            pieces = ((0, half.itrap), (half.itrap, im))
            nv += sum(simpson(np.abs(half.psi[i:j + 1]) ** 2, x=sign * half.x[i:j + 1])
                      for i, j in pieces)
            nv += tail_norm(kappa, g, dens, mode)
        nv = float(nv)
        res = [amps[0].real, amps[0].imag, amps[1].real, amps[1].imag, nv - 1.0]
    res = np.array(res)
    if not np.all(np.isfinite(res)):
        return Evaluation(np.full(len(res), SENTINEL))
    res = np.clip(res, -SENTINEL, SENTINEL)
    if not keep:
        return Evaluation(res)
    # beyond the trap, drop the growing remnant left by the finite residual;
    # it is only amplified past a matching point inside the grid
    cleaned = []
    for half, sign in zip(halves, (1, -1)):
        for vals, dvals in ((half.psi, half.dpsi), (half.mirror, half.dmirror)):
            if vals is None:
                continue
            if im >= len(vals) - 1:
                cleaned.append(vals)
                continue
            if continued:
                dens = half.psi[-1] * half.mirror[-1]
                qe = tail_rate(kappa, g, dens, mode)
                amp = (dvals[-1] + qe * vals[-1]) / (2 * qe)
            else:
                qe = tail_rate(kappa, g, abs(vals[-1]) ** 2, mode)
                amp = (sign * dvals[-1] + qe * vals[-1]) / (2 * qe)
            cleaned.append(_strip_growing(vals, half.x, qe, amp, half.itrap))
    if continued:
        x = np.concatenate([-halves[0].x[::-1], halves[0].x[1:]])
        psi = np.concatenate([cleaned[1][::-1], cleaned[0][1:]])
    else:
        x = np.concatenate([halves[1].x[::-1], halves[0].x[1:]])
        psi = np.concatenate([cleaned[1][::-1], cleaned[0][1:]])
    return Evaluation(res, x, psi, nv)


def residual(sv: ShootingVector, params: SystemParams, settings: SolverSettings) -> np.ndarray:
    """Residual vector (5 components, or 6 in continued mode)."""
    if sv.kappa_re <= 0:
        raise LeftDomain("Re kappa must be positive")
    return _evaluate(sv, params, settings).residual


def fd_jacobian(sv: ShootingVector, params: SystemParams, settings: SolverSettings,
                active=None, r0=None, func=None) -> np.ndarray:
    """Forward-difference Jacobian with respect to the active unknowns.

    Column k is ``(r(x + h e_k) - r(x)) / h`` with
    ``h = fd_step * max(1, |x_k|)``.  ``func`` replaces the residual map
    (it receives and returns arrays); used for testing.
    """
    x0 = sv.as_array()
    if func is None:
        if active is None:
            active = active_indices(params.mode)

        def func(arr):
            return residual(ShootingVector.from_array(arr), params, settings)
    elif active is None:
        active = list(range(len(x0)))
    if r0 is None:
        r0 = func(x0)
    jac = np.empty((len(r0), len(active)))
    for col, k in enumerate(active):
        h = settings.fd_step * max(1.0, abs(x0[k]))
        xk = x0.copy()
        xk[k] += h
        h = xk[k] - x0[k]
        jac[:, col] = (func(xk) - r0) / h
    return jac


def state_jacobian(sv: ShootingVector, params: SystemParams,
                   settings: SolverSettings) -> np.ndarray:
    """Jacobian at ``sv`` in the phase gauge Newton would use there."""
    if params.mode is not NonlinearityMode.ANALYTIC_CONTINUED:
        sv, gauge = _choose_gauge(sv)
        return fd_jacobian(sv, params, settings, active_indices(params.mode, gauge))
    return fd_jacobian(sv, params, settings)


def canonical_gauge(sv: ShootingVector, mode: NonlinearityMode) -> ShootingVector:
    """Representative with psi(0) real positive (or i*|psi'(0)| if psi(0)=0)."""
    psi0, dpsi0 = sv.psi0, sv.dpsi0
    if NonlinearityMode(mode) is NonlinearityMode.ANALYTIC_CONTINUED:
        sign = -1.0 if psi0.real < 0 else 1.0
        return ShootingVector.from_complex(sign * psi0, sign * dpsi0, sv.kappa)
    if abs(psi0) > 1e-12 * max(abs(dpsi0), 1e-300):
        phase = abs(psi0) / psi0
        psi0 = abs(psi0) + 0j
    elif abs(dpsi0) > 0:
        phase = 1j * abs(dpsi0) / dpsi0
        psi0 = 0j
    else:
        return sv
    return ShootingVector.from_complex(psi0, dpsi0 * phase, sv.kappa)


def _choose_gauge(sv: ShootingVector):
    """Rotate the seed so the larger of psi(0), psi'(0) is real; return gauge."""
    psi0, dpsi0 = sv.psi0, sv.dpsi0
    if abs(psi0) >= abs(dpsi0) or abs(dpsi0) == 0:
        if abs(psi0) == 0:
            return sv, _GAUGE_PSI0
        phase = abs(psi0) / psi0
        return ShootingVector.from_complex(abs(psi0), dpsi0 * phase, sv.kappa), _GAUGE_PSI0
    phase = abs(dpsi0) / dpsi0
    return ShootingVector.from_complex(psi0 * phase, abs(dpsi0), sv.kappa), _GAUGE_DPSI0


def newton_solve(initial: ShootingVector, params: SystemParams, settings: SolverSettings,
                 label: BranchLabel | None = None) -> Solution:
    """Damped Newton iteration from ``initial``; returns the converged state.

    If the iteration stalls, the root is first found with the matching point
    at ``SHORT_MATCH_DECAYS`` and then polished at the full distance.  The
    short match has a wider basin when the growing remnant would otherwise
    blow up (repulsive nonlinearity).

    Raises :class:`NoConvergence`, :class:`SingularJacobian` or
    :class:`LeftDomain`.
    """
    if not np.all(np.isfinite(initial.as_array())):
        raise NoConvergence("non-finite initial guess")
    if initial.kappa_re <= 0:
        raise LeftDomain("Re kappa must be positive")
    im = match_index(initial.kappa, params, settings)
    try:
        sv, it = _newton(initial, params, settings, im)
    except NoConvergence:
        im_short = match_index(initial.kappa, params, settings, SHORT_MATCH_DECAYS)
        if im_short >= im:
            raise
        sv, it0 = _newton(initial, params, settings, im_short)
        sv, it = _newton(sv, params, settings, im)
        it += it0
    return build_solution(canonical_gauge(sv, params.mode), params, settings, label, it, im)


def _newton(initial: ShootingVector, params: SystemParams, settings: SolverSettings,
            im: int):
    continued = params.mode is NonlinearityMode.ANALYTIC_CONTINUED
    if continued:
        sv, gauge = initial, None
    else:
        sv, gauge = _choose_gauge(initial)
    active = active_indices(params.mode, gauge if gauge is not None else _GAUGE_PSI0)

    def func(arr):
        return _evaluate(ShootingVector.from_array(arr), params, settings, im).residual

    x = sv.as_array()
    r = func(x)
    rnorm = float(np.max(np.abs(r)))
    it = slow = 0
    while rnorm >= settings.newton_tol:
        if it >= settings.newton_max_iter:
            raise NoConvergence(f"no convergence after {it} iterations", rnorm, sv)
        it += 1
        jac = fd_jacobian(sv, params, settings, active, r0=r, func=func)
        svals = np.linalg.svd(jac, compute_uv=False)
        if not np.all(np.isfinite(svals)) or svals[-1] <= svals[0] / COND_MAX:
            raise SingularJacobian("Jacobian is numerically singular", rnorm, sv)
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        r2 = float(np.dot(r, r))
        while True:
            trial = x.copy()
            trial[active] += lam * step
            if trial[4] > 0:
                r_new = func(trial)
                if float(np.dot(r_new, r_new)) < (1 - 1e-4 * lam) * r2:
                    break
            lam /= 2
            if lam < settings.damping_min:
                if trial[4] <= 0:
                    raise LeftDomain("Re kappa left the domain", rnorm, sv)
                raise NoConvergence("line search failed", rnorm, sv)
        x, r = trial, r_new
        sv = ShootingVector.from_array(x)
        new_norm = float(np.max(np.abs(r)))
        slow = slow + 1 if new_norm > STALL_RATIO * rnorm else 0
        rnorm = new_norm
        log.debug("newton it=%d lam=%g |r|=%.3e kappa=%s", it, lam, rnorm, sv.kappa)
        if slow >= STALL_ITERS:
            raise NoConvergence(f"stalled at |r| = {rnorm:.3g}", rnorm, sv)
    return sv, it


def build_solution(sv: ShootingVector, params: SystemParams, settings: SolverSettings,
                   label: BranchLabel | None = None, iterations: int = 0,
                   im: int | None = None) -> Solution:
    ev = _evaluate(sv, params, settings, im, keep=True)
    if ev.x is None:
        raise NoConvergence("integration failed at the solution", SENTINEL, sv)
    return Solution(
        params=params,
        kappa=sv.kappa,
        x=ev.x,
        psi=ev.psi,
        residual_norm=float(np.max(np.abs(ev.residual))),
        pt_defect=analysis.pt_defect(ev.x, ev.psi),
        norm_value=ev.norm_value,
        shooting=sv,
        branch_label=label,
        iterations=iterations,
    )
