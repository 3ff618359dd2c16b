"""Pure-Python shooting kernels.

Reference implementation of the compiled kernels in ``_kernels.pyx``.  Both
modules expose the same two functions with identical signatures and return
values; ``ptgpe.kernels`` picks one at import time.

The integrators march outward from ``t = 0`` over a prescribed grid ``t``
(the reporting grid).  Every grid interval is covered by Dormand-Prince 5(4)
steps; an interval whose embedded error estimate exceeds the tolerance is
split into 2, 4, 8, ... equal substeps until it passes.  At ``t[itrap]`` the
derivative jumps by ``-strength * psi``.
"""
import math

import numpy as np

# Dormand-Prince 5(4) tableau
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

BLOWUP = 1e100
MAX_HALVINGS = 12

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_UNDERFLOW = 2


def _dp_standard(u, du, h, k2, g):
    """One DP5 step of u'' = k2 u - g |u|^2 u; returns new state and error."""
    def f(y, dy):
        return dy, k2 * y - g * (y.real * y.real + y.imag * y.imag) * y

    p1, q1 = f(u, du)
    p2, q2 = f(u + h * A21 * p1, du + h * A21 * q1)
    p3, q3 = f(u + h * (A31 * p1 + A32 * p2), du + h * (A31 * q1 + A32 * q2))
    p4, q4 = f(u + h * (A41 * p1 + A42 * p2 + A43 * p3),
               du + h * (A41 * q1 + A42 * q2 + A43 * q3))
    p5, q5 = f(u + h * (A51 * p1 + A52 * p2 + A53 * p3 + A54 * p4),
               du + h * (A51 * q1 + A52 * q2 + A53 * q3 + A54 * q4))
    p6, q6 = f(u + h * (A61 * p1 + A62 * p2 + A63 * p3 + A64 * p4 + A65 * p5),
               du + h * (A61 * q1 + A62 * q2 + A63 * q3 + A64 * q4 + A65 * q5))
    un = u + h * (B1 * p1 + B3 * p3 + B4 * p4 + B5 * p5 + B6 * p6)
    dun = du + h * (B1 * q1 + B3 * q3 + B4 * q4 + B5 * q5 + B6 * q6)
    p7, q7 = f(un, dun)
    eu = h * (E1 * p1 + E3 * p3 + E4 * p4 + E5 * p5 + E6 * p6 + E7 * p7)
    edu = h * (E1 * q1 + E3 * q3 + E4 * q4 + E5 * q5 + E6 * q6 + E7 * q7)
    return un, dun, eu, edu


def _dp_continued(u, du, v, dv, h, k2, g):
    """One DP5 step of the coupled mirror system."""
    def f(a, da, c, dc):
        return da, k2 * a - g * a * a * c, dc, k2 * c - g * c * c * a

    y = (u, du, v, dv)
    k1 = f(*y)
    k2_ = f(*[y[i] + h * A21 * k1[i] for i in range(4)])
    k3 = f(*[y[i] + h * (A31 * k1[i] + A32 * k2_[i]) for i in range(4)])
    k4 = f(*[y[i] + h * (A41 * k1[i] + A42 * k2_[i] + A43 * k3[i])
             for i in range(4)])
    k5 = f(*[y[i] + h * (A51 * k1[i] + A52 * k2_[i] + A53 * k3[i] + A54 * k4[i])
             for i in range(4)])
    k6 = f(*[y[i] + h * (A61 * k1[i] + A62 * k2_[i] + A63 * k3[i] + A64 * k4[i]
                         + A65 * k5[i]) for i in range(4)])
    yn = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
          for i in range(4)]
    k7 = f(*yn)
    err = [h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                + E7 * k7[i]) for i in range(4)]
    return yn, err


def _scaled_error(y, yn, err, rtol, atol):
    worst = 0.0
    for a, b_, e in zip(y, yn, err):
        sc = atol + rtol * max(abs(a), abs(b_))
        r = abs(e) / sc
        if r > worst:
            worst = r
    return worst


def shoot_standard(psi0, dpsi0, kappa, g, strength, t, itrap, rtol, atol):
    """Integrate u'' = kappa^2 u - g|u|^2 u outward along the grid ``t``.

    Returns ``(u, du, status)`` sampled on ``t``; ``du`` at ``t[itrap]`` is the
    value just past the trap.  On failure the unreached samples are NaN.
    """
    n = len(t)
    u_out = np.full(n, np.nan, dtype=complex)
    du_out = np.full(n, np.nan, dtype=complex)
    k2 = complex(kappa) ** 2
    g = float(g)
    s = complex(strength)
    u, du = complex(psi0), complex(dpsi0)
    if itrap == 0:
        du = du - s * u
    u_out[0], du_out[0] = u, du
    for i in range(n - 1):
        h_int = float(t[i + 1] - t[i])
        nsub = 1
        while True:
            uu, dd = u, du
            hs = h_int / nsub
            worst = 0.0
            for _ in range(nsub):
                un, dun, eu, edu = _dp_standard(uu, dd, hs, k2, g)
                if not (math.isfinite(abs(un)) and math.isfinite(abs(dun))):
                    return u_out, du_out, STATUS_BLOWUP
                r = _scaled_error((uu, dd), (un, dun), (eu, edu), rtol, atol)
                if r > worst:
                    worst = r
                uu, dd = un, dun
            if worst <= 1.0:
                break
            nsub *= 2
            if nsub > 2 ** MAX_HALVINGS:
                return u_out, du_out, STATUS_UNDERFLOW
        u, du = uu, dd
        if i + 1 == itrap:
            du = du - s * u
        if abs(u) > BLOWUP or abs(du) > BLOWUP:
            return u_out, du_out, STATUS_BLOWUP
        u_out[i + 1], du_out[i + 1] = u, du
    return u_out, du_out, STATUS_OK


def shoot_continued(u0, du0, v0, dv0, kappa, g, s_u, s_v, t, itrap, rtol, atol):
    """Integrate the coupled pair u = psi(x), v = psi(-x) outward along ``t``.

    u'' = kappa^2 u - g u^2 v and v'' = kappa^2 v - g v^2 u, with jumps
    ``-s_u u`` and ``-s_v v`` in the derivatives at ``t[itrap]``.
    Returns ``(u, du, v, dv, status)``.
    """
    n = len(t)
    out = [np.full(n, np.nan, dtype=complex) for _ in range(4)]
    k2 = complex(kappa) ** 2
    g = float(g)
    su, sv = complex(s_u), complex(s_v)
    y = [complex(u0), complex(du0), complex(v0), complex(dv0)]
    if itrap == 0:
        y[1] -= su * y[0]
        y[3] -= sv * y[2]
    for j in range(4):
        out[j][0] = y[j]
    for i in range(n - 1):
        h_int = float(t[i + 1] - t[i])
        nsub = 1
        while True:
            yy = list(y)
            hs = h_int / nsub
            worst = 0.0
            for _ in range(nsub):
                yn, err = _dp_continued(*yy, hs, k2, g)
                if not all(math.isfinite(abs(c)) for c in yn):
                    return (*out, STATUS_BLOWUP)
                r = _scaled_error(yy, yn, err, rtol, atol)
                if r > worst:
                    worst = r
                yy = yn
            if worst <= 1.0:
                break
            nsub *= 2
            if nsub > 2 ** MAX_HALVINGS:
                return (*out, STATUS_UNDERFLOW)
        y = yy
        if i + 1 == itrap:
            y[1] -= su * y[0]
            y[3] -= sv * y[2]
        if max(abs(c) for c in y) > BLOWUP:
            return (*out, STATUS_BLOWUP)
        for j in range(4):
            out[j][i + 1] = y[j]
    return (*out, STATUS_OK)
