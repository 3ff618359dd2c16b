"""Linear oracle, seeding, continuation in g and gamma, critical points."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .model import (BranchLabel, NonlinearityMode, ShootingVector, Solution,
                    SolverSettings, SystemParams)
from .shooting import (SolverError, active_indices, canonical_gauge, fd_jacobian,
                       newton_solve, state_jacobian)

log = logging.getLogger(__name__)

COALESCE_TOL = 1e-6
MERGE_TOL = 1e-6
# corrector moves larger than this times the gamma step count as a branch jump
JUMP_SLOPE = 2.0
G_STEP_MIN = 1e-3


def linear_dispersion(kappa, a, gamma):
    """Left side of the linear (g = 0) eigenvalue condition; zero at eigenvalues.

    Matching ``exp(kappa x)``, ``exp(+-kappa x)``, ``exp(-kappa x)`` across
    traps of strengths ``s1 = 1 + i*gamma`` and ``s2 = 1 - i*gamma`` gives
    ``(2 kappa - s1)(2 kappa - s2) = s1 s2 exp(-2 kappa a)``.
    """
    kappa = np.asarray(kappa, dtype=complex)
    return (2 * kappa - 1) ** 2 + gamma ** 2 - (1 + gamma ** 2) * np.exp(-2 * kappa * a)


def _dispersion_prime(kappa, a, gamma):
    return 4 * (2 * kappa - 1) + 2 * a * (1 + gamma ** 2) * np.exp(-2 * kappa * a)


def linear_eigenvalues(a: float, gamma: float, tol: float = 1e-10):
    """All roots with Re kappa > 0 of the linear eigenvalue condition.

    Complex Newton from a seed grid over Re kappa in (0, 1.2],
    Im kappa in [-1, 1]; roots closer than ``tol`` are merged.  Sorted by
    decreasing real part, then decreasing imaginary part.
    """
    roots = []
    for kr in np.linspace(0.05, 1.2, 24):
        for ki in np.linspace(-1.0, 1.0, 21):
            z = complex(kr, ki)
            for _ in range(100):
                dz = linear_dispersion(z, a, gamma) / _dispersion_prime(z, a, gamma)
                z -= dz
                if not np.isfinite(z) or abs(z) > 10:
                    break
                if abs(dz) < 1e-15 * max(1.0, abs(z)):
                    break
            if not np.isfinite(z) or z.real <= 1e-6 or abs(z) > 10:
                continue
            if abs(linear_dispersion(z, a, gamma)) > 1e-10:
                continue
            if abs(z.imag) < 1e-13:
                z = complex(z.real, 0.0)
            if all(abs(z - r) > max(tol, 1e-7 * abs(r)) for r in roots):
                roots.append(complex(z))
    return sorted(roots, key=lambda z: (-round(z.real, 12), -z.imag))


def linear_state(a: float, gamma: float, kappa: complex):
    """Normalized linear eigenfunction: returns ``(psi0, dpsi0, psi_of_x)``."""
    kappa = complex(kappa)
    b = a / 2
    s2 = complex(1.0, -gamma)
    alpha = s2 / (2 * kappa)
    beta = (2 * kappa - s2) / (2 * kappa)
    r, w = kappa.real, kappa.imag
    mid = (abs(alpha) ** 2 * (1 - np.exp(-2 * r * a)) / (2 * r)
           + abs(beta) ** 2 * (np.exp(2 * r * a) - 1) / (2 * r))
    cross = a if abs(w) < 1e-14 else (1 - np.exp(-2j * w * a)) / (2j * w)
    mid += 2 * (alpha * np.conj(beta) * cross).real
    psi_left = alpha * np.exp(-kappa * a) + beta * np.exp(kappa * a)
    norm = mid + (1 + abs(psi_left) ** 2) / (2 * r)
    c = 1 / np.sqrt(norm)

    def psi(x):
        x = np.asarray(x, dtype=float)
        y = x - b
        inner = alpha * np.exp(kappa * y) + beta * np.exp(-kappa * y)
        out = np.where(x > b, np.exp(-kappa * y),
                       np.where(x < -b, psi_left * np.exp(kappa * (x + b)), inner))
        return c * out

    psi0 = c * (alpha * np.exp(-kappa * b) + beta * np.exp(kappa * b))
    dpsi0 = c * kappa * (alpha * np.exp(-kappa * b) - beta * np.exp(kappa * b))
    return complex(psi0), complex(dpsi0), psi


def seed_from_linear(a: float, gamma: float, kappa_lin: complex) -> ShootingVector:
    """Shooting vector of the exact linear eigenstate, in canonical gauge."""
    psi0, dpsi0, _ = linear_state(a, gamma, kappa_lin)
    sv = ShootingVector.from_complex(psi0, dpsi0, kappa_lin)
    return canonical_gauge(sv, NonlinearityMode.MODULUS_SQUARED)


class LostConvergence(RuntimeError):
    """Continuation could not proceed; ``last`` is the last good solution."""

    def __init__(self, message, last=None, at=None):
        super().__init__(message)
        self.last = last
        self.at = at


class BranchesDisjoint(RuntimeError):
    pass


class NoMerge(RuntimeError):
    pass


class Termination(str, enum.Enum):
    REACHED_GAMMA_MAX = "reached_gamma_max"
    COALESCED = "coalesced"
    LOST_CONVERGENCE = "lost_convergence"
    MERGED_TO_REAL_AXIS = "merged_to_real_axis"


@dataclass
class Branch:
    """One eigenvalue family traced in gamma.

    ``failed_at`` is the gamma of the last rejected step (``None`` if the
    branch ran to its end point).
    """

    label: BranchLabel
    points: list = field(default_factory=list)
    termination: Termination | None = None
    failed_at: float | None = None

    @property
    def gammas(self) -> np.ndarray:
        return np.array([g for g, _ in self.points])

    @property
    def kappas(self) -> np.ndarray:
        return np.array([s.kappa for _, s in self.points])

    @property
    def last(self) -> Solution:
        return self.points[-1][1]

    def nearest(self, gamma: float) -> Solution:
        i = int(np.argmin(np.abs(self.gammas - gamma)))
        return self.points[i][1]


@dataclass(frozen=True)
class CriticalPoints:
    gamma_cr: float
    gamma_b: float
    kappa_at_cr: complex
    exponent_p: float = float("nan")
    bracket_cr: tuple = (float("nan"), float("nan"))
    bracket_b: tuple = (float("nan"), float("nan"))
    kappa_gap: float = float("nan")


# --- seeding ------------------------------------------------------------------

def continue_in_g(seed: ShootingVector, params: SystemParams, settings: SolverSettings,
                  label: BranchLabel | None = None, g_step: float = 0.1) -> Solution:
    """Deform a g = 0 eigenstate into the eigenstate at ``params.g``.

    Steps of at most ``g_step`` (halved on failure) with a secant predictor
    after the first two points.
    """
    base = params.replace(g=0.0)
    sol = newton_solve(seed, base, settings, label)
    if params.g == 0:
        return sol
    target = params.g
    g_now, step = 0.0, g_step
    prev = None
    while g_now != target:
        g_next = g_now + np.sign(target) * min(step, abs(target - g_now))
        guess = sol.shooting
        if prev is not None:
            g_p, sv_p = prev
            w = (g_next - g_now) / (g_now - g_p)
            guess = ShootingVector.from_array(
                sol.shooting.as_array() + w * (sol.shooting.as_array() - sv_p.as_array()))
        try:
            new = newton_solve(guess, params.replace(g=g_next), settings, label)
        except SolverError:
            step /= 2
            if step < G_STEP_MIN:
                raise LostConvergence(f"g-continuation stalled at g = {g_now}", sol, g_now)
            continue
        prev = (g_now, sol.shooting)
        sol, g_now = new, g_next
        if new.iterations <= 3:
            step = min(g_step, step * 1.5)
    return sol


def real_states(params: SystemParams, settings: SolverSettings,
                labels=(BranchLabel.GROUND_REAL, BranchLabel.EXCITED_REAL)):
    """Ground and excited states at ``params.gamma`` by continuation from g = 0.

    Returns ``{label: Solution}``; a state that cannot be continued to the
    target g (e.g. one that unbinds) is left out.
    """
    roots = [k for k in linear_eigenvalues(params.a, params.gamma) if abs(k.imag) < 1e-12]
    out = {}
    for label, k in zip((BranchLabel.GROUND_REAL, BranchLabel.EXCITED_REAL), roots):
        if label not in labels:
            continue
        seed = seed_from_linear(params.a, params.gamma, k)
        try:
            out[label] = continue_in_g(seed, params, settings, label)
        except (LostConvergence, SolverError) as exc:
            log.info("no %s state at gamma=%g, g=%g: %s", label.value, params.gamma,
                     params.g, exc)
    return out


# --- continuation in gamma ------------------------------------------------------

def _solve_at(seed: ShootingVector, params: SystemParams, gamma: float,
              settings: SolverSettings, label=None) -> Solution:
    return newton_solve(seed, params.replace(gamma=float(gamma)), settings, label)


def _smallest_singular_ratio(sol: Solution, settings: SolverSettings) -> float:
    jac = state_jacobian(sol.shooting, sol.params, settings)
    sv = np.linalg.svd(jac, compute_uv=False)
    return float(sv[-1] / sv[0])


def trace_branch(start: Solution, gamma_range, settings: SolverSettings,
                 label: BranchLabel | None = None) -> Branch:
    """Follow ``start`` in gamma from ``gamma_range[0]`` towards ``gamma_range[1]``.

    Secant predictor on the shooting vector, Newton corrector, step halved on
    failure or on a corrector jump and grown by 1.5 after easy steps.
    Termination is recorded on the branch rather than raised.
    """
    label = label or start.branch_label
    g0, g1 = float(gamma_range[0]), float(gamma_range[1])
    branch = Branch(label, [(g0, start.with_label(label))])
    if g1 == g0:
        branch.termination = Termination.REACHED_GAMMA_MAX
        return branch
    direction = 1.0 if g1 > g0 else -1.0
    complex_branch = abs(start.kappa.imag) > MERGE_TOL
    params = start.params
    step = settings.continuation_step
    while True:
        g_now, sol = branch.points[-1]
        if abs(g1 - g_now) < 1e-12:
            branch.termination = Termination.REACHED_GAMMA_MAX
            return branch
        g_next = g_now + direction * min(step, abs(g1 - g_now))
        guess = sol.shooting.as_array()
        if len(branch.points) > 1:
            g_p, sol_p = branch.points[-2]
            guess = guess + (g_next - g_now) / (g_now - g_p) * (guess - sol_p.shooting.as_array())
        guess = ShootingVector.from_array(guess)
        accepted = None
        try:
            new = _solve_at(guess, params, g_next, settings, label)
            moved = abs(new.kappa - guess.kappa)
            predicted = abs(guess.kappa - sol.kappa)
            if len(branch.points) == 1 or moved <= max(0.5 * predicted, JUMP_SLOPE * abs(g_next - g_now)):
                accepted = new
        except SolverError:
            pass
        if accepted is not None and complex_branch and abs(accepted.kappa.imag) < MERGE_TOL:
            branch.failed_at = g_next
            branch.termination = Termination.MERGED_TO_REAL_AXIS
            return branch
        if accepted is None:
            step /= 2
            if step < settings.continuation_step_min:
                branch.failed_at = g_next
                branch.termination = _classify_stop(branch, complex_branch, settings)
                return branch
            continue
        branch.points.append((g_next, accepted))
        if accepted.iterations <= 3:
            step = min(settings.continuation_step, step * 1.5)


def _classify_stop(branch: Branch, complex_branch: bool, settings: SolverSettings) -> Termination:
    last = branch.last
    if complex_branch:
        first = abs(branch.points[0][1].kappa.imag)
        if abs(last.kappa.imag) < 0.1 * first:
            return Termination.MERGED_TO_REAL_AXIS
        return Termination.LOST_CONVERGENCE
    ratio = _smallest_singular_ratio(last, settings)
    ratio0 = _smallest_singular_ratio(branch.points[0][1], settings)
    if ratio < 0.05 * ratio0:
        return Termination.COALESCED
    return Termination.LOST_CONVERGENCE


# --- exceptional point -----------------------------------------------------------

def _pair_at(gamma, seeds, params, settings):
    """Solve both real branches at gamma; None unless both converge distinctly."""
    out = []
    for sv, label in seeds:
        try:
            out.append(_solve_at(sv, params, gamma, settings, label))
        except SolverError:
            return None
    if abs(out[0].kappa - out[1].kappa) < 1e-12:
        return None
    return out


def locate_gamma_cr(ground: Branch, excited: Branch, settings: SolverSettings,
                    tol: float = 1e-10, fit_decade=(1e-4, 1e-3)):
    """Exceptional point where the two real branches coalesce.

    Bisection between the last gamma where both branches converge to
    distinct states and the first where they do not.  Coalescence is
    declared when the gap closes below ``COALESCE_TOL`` or the bracket below
    ``tol``.  The gap is then fitted to ``c (gamma_cr - gamma)^p`` over
    ``gamma_cr - gamma`` in ``fit_decade``.

    Returns ``(gamma_cr, kappa_at_cr, info)``; ``info`` carries the bracket,
    the final gap, the exponent and the fit samples.
    """
    if not ground.points or not excited.points:
        raise BranchesDisjoint("empty branch")
    params = ground.last.params
    lo = min(ground.gammas.max(), excited.gammas.max())
    fails = [b.failed_at for b in (ground, excited) if b.failed_at is not None]
    hi = max(fails) if fails else None
    if hi is None or hi <= lo:
        raise BranchesDisjoint("branches do not terminate in a common fold")
    seeds = [(ground.nearest(lo).shooting, BranchLabel.GROUND_REAL),
             (excited.nearest(lo).shooting, BranchLabel.EXCITED_REAL)]
    pair = _pair_at(lo, seeds, params, settings)
    if pair is None:
        raise BranchesDisjoint(f"branches not both present at gamma={lo}")
    gap0 = abs(ground.points[0][1].kappa - excited.points[0][1].kappa)
    if abs(pair[0].kappa - pair[1].kappa) > 0.5 * gap0:
        raise BranchesDisjoint("branches never approach each other")
    while hi - lo > tol and abs(pair[0].kappa - pair[1].kappa) > COALESCE_TOL:
        mid = 0.5 * (lo + hi)
        trial = _pair_at(mid, [(p.shooting, p.branch_label) for p in pair], params, settings)
        if trial is None:
            hi = mid
        else:
            lo, pair = mid, trial
    gamma_cr = 0.5 * (lo + hi)
    kappa_cr = 0.5 * (pair[0].kappa + pair[1].kappa)
    gap = float(abs(pair[0].kappa - pair[1].kappa))
    info = {"bracket": (lo, hi), "gap": gap, "pair": pair, "gamma_cr_bisection": gamma_cr}
    info.update(fold_exponent(ground, excited, gamma_cr, settings, fit_decade))
    if gap > COALESCE_TOL and len(info["fit_deltas"]) >= 4:
        # Newton converges only linearly right at the fold, so the bisection
        # stalls short of it; the square-root law pins the fold more tightly
        gam = gamma_cr - np.asarray(info["fit_deltas"])
        gaps2 = np.asarray(info["fit_gaps"]) ** 2
        roots = np.roots(np.polyfit(gam, gaps2, 2))
        roots = roots[np.isreal(roots)].real
        if len(roots):
            fit = float(roots[np.argmin(np.abs(roots - gamma_cr))])
            if lo - 1e-3 < fit < hi + 1e-3:
                mids = np.asarray(info["fit_mids"])
                kappa_cr = complex(np.polyval(np.polyfit(gam, mids.real, 1), fit),
                                   np.polyval(np.polyfit(gam, mids.imag, 1), fit))
                gamma_cr = fit
    return gamma_cr, kappa_cr, info


def fold_exponent(ground: Branch, excited: Branch, gamma_cr: float,
                  settings: SolverSettings, decade=(1e-4, 1e-3), n: int = 6):
    """Fit ``|kappa_1 - kappa_2| = c (gamma_cr - gamma)^p`` on a log grid."""
    params = ground.last.params
    deltas = np.geomspace(decade[1], decade[0], n)
    gaps, dists, used, mids, pairs = [], [], [], [], []
    seeds = None
    for d in deltas:
        g = gamma_cr - d
        if seeds is None:
            seeds = [(_branch_seed(ground, g), BranchLabel.GROUND_REAL),
                     (_branch_seed(excited, g), BranchLabel.EXCITED_REAL)]
        pair = _pair_at(g, seeds, params, settings)
        if pair is None:
            continue
        seeds = [(p.shooting, p.branch_label) for p in pair]
        used.append(d)
        gaps.append(abs(pair[0].kappa - pair[1].kappa))
        mids.append(0.5 * (pair[0].kappa + pair[1].kappa))
        pairs.append(pair)
        dists.append(float(np.max(np.abs(pair[0].psi - pair[1].psi))))
    if len(used) < 3:
        return {"exponent_p": float("nan"), "fit_deltas": used, "fit_gaps": gaps,
                "fit_psi_distance": dists, "fit_mids": mids, "fit_pairs": pairs}
    p, _ = np.polyfit(np.log(used), np.log(gaps), 1)
    return {"exponent_p": float(p), "fit_deltas": used, "fit_gaps": gaps,
            "fit_psi_distance": dists, "fit_mids": mids, "fit_pairs": pairs}


def _branch_seed(branch: Branch, gamma: float) -> ShootingVector:
    """Shooting vector of the branch point just below ``gamma``."""
    g = branch.gammas
    below = np.where(g <= gamma)[0]
    i = below[np.argmax(g[below])] if len(below) else int(np.argmin(np.abs(g - gamma)))
    return branch.points[i][1].shooting


def state_on_branch(branch: Branch, gamma: float, settings: SolverSettings) -> Solution:
    """Converged state of ``branch`` at an arbitrary ``gamma`` inside its range.

    The range extends up to the gamma where tracing stopped, if recorded.
    """
    g = branch.gammas
    lo, hi = g.min(), g.max()
    if branch.failed_at is not None:
        lo, hi = min(lo, branch.failed_at), max(hi, branch.failed_at)
    if not lo - 1e-12 <= gamma <= hi + 1e-12:
        raise ValueError(f"gamma={gamma} outside branch range [{g.min()}, {g.max()}]")
    hit = np.where(np.abs(g - gamma) < 1e-14)[0]
    if len(hit):
        return branch.points[int(hit[0])][1]
    i = int(np.argmin(np.abs(g - gamma)))
    sol = branch.points[i][1]
    return _solve_at(sol.shooting, sol.params, gamma, settings, branch.label)


# --- symmetry-breaking bifurcation -------------------------------------------------

def _jacobian_det_sign(sol: Solution, settings: SolverSettings) -> float:
    """Sign of det J in the psi(0) gauge; NaN where that gauge degenerates."""
    sv = sol.shooting
    if abs(sv.psi0) < 1e-3 * abs(sv.dpsi0):
        return float("nan")
    jac = fd_jacobian(sv, sol.params, settings)
    return float(np.sign(np.linalg.det(jac)))


def find_pitchfork(branch: Branch, settings: SolverSettings, tol: float = 1e-4):
    """Gamma interval where the Jacobian determinant changes sign along a real branch.

    A sign change away from the branch's end point marks a bifurcation off
    the branch.  Returns ``(lo, hi, sol_lo, sol_hi)`` or ``None``.
    """
    pts = branch.points
    if len(pts) < 2:
        return None
    signs = [_jacobian_det_sign(s, settings) for _, s in pts]
    for i in range(len(pts) - 1):
        if signs[i] * signs[i + 1] < 0:
            (g_lo, s_lo), (g_hi, s_hi) = pts[i], pts[i + 1]
            sign_lo = signs[i]
            while abs(g_hi - g_lo) > tol:
                mid = 0.5 * (g_lo + g_hi)
                try:
                    s_mid = _solve_at(s_lo.shooting, s_lo.params, mid, settings, branch.label)
                except SolverError:
                    break
                if _jacobian_det_sign(s_mid, settings) == sign_lo:
                    g_lo, s_lo = mid, s_mid
                else:
                    g_hi, s_hi = mid, s_mid
            return g_lo, g_hi, s_lo, s_hi
    return None


def seed_broken(parent: Branch, settings: SolverSettings, offset: float = 0.01,
                kicks=(1e-3, 1e-2, 3e-2, 1e-1)):
    """Converged symmetry-broken state next to the bifurcation on ``parent``.

    The parent state at ``gamma_b + offset`` is perturbed by kicks of
    ``+-eps`` in Im kappa first, then along the Jacobian null direction.
    Returns ``(gamma, Solution)`` with Im kappa > 0, or ``None``.
    """
    found = find_pitchfork(parent, settings)
    if found is None:
        return None
    g_lo, g_hi, s_lo, s_hi = found
    gamma = g_hi + offset
    try:
        base = _solve_at(_branch_seed(parent, gamma), s_hi.params, gamma, settings, parent.label)
    except SolverError:
        return None
    x0 = base.shooting.as_array()
    active = active_indices(base.params.mode)
    _, _, vt = np.linalg.svd(fd_jacobian(s_hi.shooting, s_hi.params, settings))
    null = np.zeros(6)
    null[active] = vt[-1]
    directions = [np.eye(6)[5]] + [null]
    for direction in directions:
        for eps in kicks:
            for sign in (1, -1):
                guess = ShootingVector.from_array(x0 + sign * eps * direction / np.max(np.abs(direction)))
                if guess.kappa_re <= 0:
                    continue
                try:
                    sol = _solve_at(guess, base.params, gamma, settings)
                except SolverError:
                    continue
                if abs(sol.kappa.imag) > 10 * MERGE_TOL and sol.pt_defect > 1e-4:
                    if sol.kappa.imag < 0:
                        sol = pt_partner(sol, settings)
                    return gamma, sol.with_label(BranchLabel.BROKEN_DECAYING)
    return None


def pt_partner(sol: Solution, settings: SolverSettings, label=None) -> Solution:
    """Solve from the PT-reflected data ``(conj kappa, conj psi(-x))``."""
    guess = sol.shooting.pt_reflected()
    if label is None and sol.branch_label is not None:
        label = _PARTNER.get(sol.branch_label, sol.branch_label)
    return newton_solve(guess, sol.params, settings, label)


_PARTNER = {
    BranchLabel.BROKEN_DECAYING: BranchLabel.BROKEN_GROWING,
    BranchLabel.BROKEN_GROWING: BranchLabel.BROKEN_DECAYING,
    BranchLabel.CONTINUED_PLUS: BranchLabel.CONTINUED_MINUS,
    BranchLabel.CONTINUED_MINUS: BranchLabel.CONTINUED_PLUS,
}


def partner_branch(branch: Branch, settings: SolverSettings) -> Branch:
    """PT-partner of a complex branch, every point re-solved independently."""
    label = _PARTNER[branch.label]
    points = [(g, pt_partner(s, settings, label)) for g, s in branch.points]
    return Branch(label, points, branch.termination, branch.failed_at)


def locate_gamma_b(broken: Branch, settings: SolverSettings, ground: Branch | None = None,
                   tol: float = 1e-9):
    """Gamma where the broken pair merges into a real branch.

    ``broken`` must be traced downward in gamma.  Bisection between its
    lowest converged point (|Im kappa| > MERGE_TOL) and the gamma where it
    was lost.  Returns ``(gamma_b, info)``; with ``ground`` given, ``info``
    holds ``|Re kappa - kappa_ground|`` at ``gamma_b``.
    """
    if broken.failed_at is None:
        raise NoMerge("broken branch was not traced down to its end")
    lo_sol = broken.points[-1][1]
    hi_g = broken.points[-1][0]
    lo_g = broken.failed_at
    if hi_g < lo_g:
        raise NoMerge("broken branch must be traced towards smaller gamma")
    params = lo_sol.params
    sol_hi = lo_sol
    while hi_g - lo_g > tol:
        mid = 0.5 * (lo_g + hi_g)
        try:
            s = _solve_at(sol_hi.shooting, params, mid, settings, broken.label)
            ok = abs(s.kappa.imag) > MERGE_TOL and abs(s.kappa - sol_hi.kappa) < 0.5
        except SolverError:
            ok = False
        if ok:
            hi_g, sol_hi = mid, s
        else:
            lo_g = mid
    gamma_b = 0.5 * (lo_g + hi_g)
    if abs(sol_hi.kappa.imag) > 1e-2:
        raise NoMerge(f"Im kappa stays at {sol_hi.kappa.imag:.3g} down to gamma={gamma_b}")
    info = {"bracket": (lo_g, hi_g), "kappa": sol_hi.kappa, "re_kappa_mismatch": float("nan")}
    if ground is not None:
        g_sol = _solve_at(_branch_seed(ground, gamma_b), params, gamma_b, settings)
        info["re_kappa_mismatch"] = float(abs(sol_hi.kappa.real - g_sol.kappa.real))
        info["parent_kappa"] = g_sol.kappa
    return gamma_b, info


# --- analytic continuation --------------------------------------------------------

def continued_seeds(pair, gamma_cr: float, gamma: float):
    """Seeds for the continued pair at ``gamma > gamma_cr`` from the real pair below.

    Near the fold the roots go as ``z_c +- w sqrt(gamma_cr - gamma)``; past it
    the analytic system has ``z_c +- i w sqrt(gamma - gamma_cr)``.
    """
    g_pair = pair[0].params.gamma
    z1 = pair[0].shooting.psi0, pair[0].shooting.dpsi0, pair[0].kappa
    z2 = pair[1].shooting.psi0, pair[1].shooting.dpsi0, pair[1].kappa
    scale = np.sqrt(abs(gamma - gamma_cr) / max(gamma_cr - g_pair, 1e-300))
    seeds = []
    for sign in (1, -1):
        vals = [0.5 * (a + b) + sign * 1j * scale * 0.5 * (a - b) for a, b in zip(z1, z2)]
        seeds.append(ShootingVector.from_complex(*vals))
    return seeds


def continued_branch(ground: Branch, excited: Branch, gamma_cr: float, gamma_max: float,
                     settings: SolverSettings, offset: float = 1e-4):
    """Trace the analytically continued pair from ``gamma_cr + offset`` upward.

    The real pair is re-solved at ``gamma_cr - offset`` to build the seeds.
    Returns ``(plus, minus)`` branches (Im kappa > 0 and < 0).
    """
    base = ground.last.params
    seeds = [(_branch_seed(ground, gamma_cr - offset), BranchLabel.GROUND_REAL),
             (_branch_seed(excited, gamma_cr - offset), BranchLabel.EXCITED_REAL)]
    pair = _pair_at(gamma_cr - offset, seeds, base, settings)
    if pair is None:
        raise LostConvergence(f"real pair not found at gamma={gamma_cr - offset}")
    params = base.replace(mode=NonlinearityMode.ANALYTIC_CONTINUED)
    gamma = gamma_cr + offset
    sols = []
    for seed in continued_seeds(pair, gamma_cr, gamma):
        try:
            sols.append(_solve_at(seed, params, gamma, settings))
        except SolverError as exc:
            raise LostConvergence(f"continued seed failed at gamma={gamma}: {exc}")
    sols.sort(key=lambda s: -s.kappa.imag)
    if not sols[0].kappa.imag > MERGE_TOL:
        raise LostConvergence("continued seeds fell back onto the real branches")
    plus = trace_branch(sols[0].with_label(BranchLabel.CONTINUED_PLUS), (gamma, gamma_max),
                        settings, BranchLabel.CONTINUED_PLUS)
    return plus, partner_branch(plus, settings)


# --- full gamma scan -------------------------------------------------------------

@dataclass
class Spectrum:
    """Every branch family found in a gamma window, plus its critical points."""

    params: SystemParams
    branches: dict
    critical: CriticalPoints | None = None
    info: dict = field(default_factory=dict)


def _join(down: Branch, up: Branch) -> Branch:
    """Glue a downward and an upward trace sharing their first point."""
    points = list(reversed(down.points[1:])) + up.points
    return Branch(up.label, points, up.termination, up.failed_at)


def _seed_real(params: SystemParams, gamma_min: float, gamma_max: float,
               settings: SolverSettings, scan_step: float = 0.05):
    """First gamma (scanning upward) where each real state can be seeded."""
    seeds = {}
    todo = [BranchLabel.GROUND_REAL, BranchLabel.EXCITED_REAL]
    for gamma in np.arange(gamma_min, gamma_max + 1e-12, scan_step):
        missing = [lab for lab in todo if lab not in seeds]
        found = real_states(params.replace(gamma=float(gamma)), settings, missing)
        for label, sol in found.items():
            seeds.setdefault(label, sol)
        if len(seeds) == 2:
            break
    return seeds


def _seed_broken_from_linear(params: SystemParams, gamma: float, settings: SolverSettings):
    """Complex pair at ``gamma`` continued in g from the linear complex roots."""
    roots = [k for k in linear_eigenvalues(params.a, gamma) if k.imag > 1e-8]
    for k in roots:
        try:
            sol = continue_in_g(seed_from_linear(params.a, gamma, k),
                                params.replace(gamma=gamma), settings)
        except (LostConvergence, SolverError):
            continue
        if sol.kappa.imag > MERGE_TOL:
            return sol.with_label(BranchLabel.BROKEN_DECAYING)
    return None


def _parent_at(gamma_b, kappa_b, candidates, settings, b_info):
    """Real branch the broken pair merges into: the one closest in Re kappa."""
    best = None
    for cand in candidates:
        if cand is None or not cand.gammas.min() <= gamma_b <= cand.gammas.max():
            continue
        try:
            sol = _solve_at(_branch_seed(cand, gamma_b), cand.last.params, gamma_b, settings)
        except SolverError:
            continue
        mismatch = abs(kappa_b.real - sol.kappa.real)
        if best is None or mismatch < best[0]:
            best = (mismatch, cand, sol.kappa)
    if best is None:
        return None
    b_info["re_kappa_mismatch"] = float(best[0])
    b_info["parent_kappa"] = best[2]
    return best[1]


def compute_spectrum(params: SystemParams, gamma_min: float, gamma_max: float,
                     settings: SolverSettings, continued: bool = False) -> Spectrum:
    """Trace the real, broken and (optionally) continued families on a gamma window.

    Raises :class:`LostConvergence` if no real branch can be seeded.
    """
    params = params.replace(mode=NonlinearityMode.MODULUS_SQUARED)
    branches, info = {}, {}
    for label, seed in _seed_real(params, gamma_min, gamma_max, settings).items():
        g0 = seed.params.gamma
        up = trace_branch(seed, (g0, gamma_max), settings, label)
        down = trace_branch(seed, (g0, gamma_min), settings, label)
        branches[label] = _join(down, up)
        info[f"{label.value}_lower_end"] = down.points[-1][0]
    if not branches:
        raise LostConvergence("no real branch could be seeded")
    ground = branches.get(BranchLabel.GROUND_REAL)
    excited = branches.get(BranchLabel.EXCITED_REAL)

    gamma_cr = kappa_cr = None
    cr_info = {}
    if ground is not None and excited is not None:
        try:
            gamma_cr, kappa_cr, cr_info = locate_gamma_cr(ground, excited, settings)
        except BranchesDisjoint as exc:
            info["gamma_cr_error"] = str(exc)

    if gamma_cr is not None:
        # the fold samples are converged points of both branches closer to gamma_cr
        extra = cr_info.get("fit_pairs", []) + [cr_info["pair"]]
        for idx, br in enumerate((ground, excited)):
            top = br.gammas.max()
            new = sorted(((p[idx].params.gamma, p[idx]) for p in extra
                          if p[idx].params.gamma > top), key=lambda t: t[0])
            br.points.extend(new)
            br.termination = Termination.COALESCED

    # symmetry-broken pair: off a pitchfork if there is one, else from g = 0
    broken = parent = None
    for cand in (ground, excited):
        if cand is None:
            continue
        seeded = seed_broken(cand, settings)
        if seeded is not None:
            parent = cand
            broken = seeded
            break
    if broken is None and gamma_cr is not None and gamma_max > gamma_cr:
        start = min(gamma_max, gamma_cr + 0.05)
        sol = _seed_broken_from_linear(params, start, settings)
        if sol is not None:
            broken = (start, sol)
    gamma_b = None
    b_info = {}
    if broken is not None:
        g0, sol = broken
        up = trace_branch(sol, (g0, gamma_max), settings, BranchLabel.BROKEN_DECAYING)
        down = trace_branch(sol, (g0, gamma_min), settings, BranchLabel.BROKEN_DECAYING)
        try:
            gamma_b, b_info = locate_gamma_b(down, settings)
            parent = _parent_at(gamma_b, b_info["kappa"], [ground, excited], settings, b_info)
        except NoMerge as exc:
            info["gamma_b_error"] = str(exc)
        plus = _join(down, up)
        branches[BranchLabel.BROKEN_DECAYING] = plus
        branches[BranchLabel.BROKEN_GROWING] = partner_branch(plus, settings)
        info["broken_parent"] = parent.label.value if parent is not None else None

    if continued and gamma_cr is not None and gamma_max > gamma_cr:
        try:
            cplus, cminus = continued_branch(ground, excited, gamma_cr, gamma_max, settings)
            branches[BranchLabel.CONTINUED_PLUS] = cplus
            branches[BranchLabel.CONTINUED_MINUS] = cminus
        except LostConvergence as exc:
            info["continued_error"] = str(exc)

    critical = None
    if gamma_cr is not None:
        critical = CriticalPoints(
            gamma_cr=gamma_cr,
            gamma_b=gamma_b if gamma_b is not None else float("nan"),
            kappa_at_cr=kappa_cr,
            exponent_p=cr_info.get("exponent_p", float("nan")),
            bracket_cr=tuple(cr_info.get("bracket", (float("nan"),) * 2)),
            bracket_b=tuple(b_info.get("bracket", (float("nan"),) * 2)),
            kappa_gap=cr_info.get("gap", float("nan")),
        )
    info["gamma_cr"] = cr_info
    info["gamma_b"] = b_info
    return Spectrum(params, branches, critical, info)
