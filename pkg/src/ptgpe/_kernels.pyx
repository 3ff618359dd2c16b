# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shooting kernels.

Same algorithm, signatures and return values as ``_kernels_py``; see that
module for the description.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite, fabs, sqrt

cnp.import_array()

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561
cdef double A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double BLOWUP = 1e100
cdef int MAX_HALVINGS = 12

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_UNDERFLOW = 2


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline bint cfinite(double complex z) nogil:
    return isfinite(z.real) and isfinite(z.imag)


# y[0..m) holds (u, du) or (u, du, v, dv); f writes derivatives into k
cdef inline void rhs(const double complex *y, double complex *k, int m,
                     double complex k2, double g) nogil:
    cdef double n2
    if m == 2:
        n2 = y[0].real * y[0].real + y[0].imag * y[0].imag
        k[0] = y[1]
        k[1] = k2 * y[0] - g * n2 * y[0]
    else:
        k[0] = y[1]
        k[1] = k2 * y[0] - g * y[0] * y[0] * y[2]
        k[2] = y[3]
        k[3] = k2 * y[2] - g * y[2] * y[2] * y[0]


cdef int dp_step(double complex *y, double h, double complex k2, double g,
                 int m, double rtol, double atol, double *worst) nogil:
    """Advance y in place by one DP5 step; update worst scaled error."""
    cdef double complex k1[4]
    cdef double complex kk2[4]
    cdef double complex k3[4]
    cdef double complex k4[4]
    cdef double complex k5[4]
    cdef double complex k6[4]
    cdef double complex k7[4]
    cdef double complex tmp[4]
    cdef double complex yn[4]
    cdef double complex e
    cdef double sc, r, ay, an
    cdef int i
    rhs(y, k1, m, k2, g)
    for i in range(m):
        tmp[i] = y[i] + h * A21 * k1[i]
    rhs(tmp, kk2, m, k2, g)
    for i in range(m):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * kk2[i])
    rhs(tmp, k3, m, k2, g)
    for i in range(m):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * kk2[i] + A43 * k3[i])
    rhs(tmp, k4, m, k2, g)
    for i in range(m):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * kk2[i] + A53 * k3[i] + A54 * k4[i])
    rhs(tmp, k5, m, k2, g)
    for i in range(m):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * kk2[i] + A63 * k3[i]
                             + A64 * k4[i] + A65 * k5[i])
    rhs(tmp, k6, m, k2, g)
    for i in range(m):
        yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i]
                            + B6 * k6[i])
        if not cfinite(yn[i]):
            return 1
    rhs(yn, k7, m, k2, g)
    for i in range(m):
        e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                 + E7 * k7[i])
        ay = cabs_(y[i])
        an = cabs_(yn[i])
        sc = atol + rtol * (ay if ay > an else an)
        r = cabs_(e) / sc
        if r > worst[0]:
            worst[0] = r
        y[i] = yn[i]
    return 0


cdef int march(double complex *y, int m, double complex k2, double g,
               double complex *jump, const double *t, int n, int itrap,
               double rtol, double atol, double complex *out) nogil:
    """March y over grid t, writing m columns per row into out."""
    cdef double complex yy[4]
    cdef double worst, h_int, hs, big
    cdef int i, j, s, nsub, flag
    if itrap == 0:
        for j in range(0, m, 2):
            y[j + 1] = y[j + 1] - jump[j // 2] * y[j]
    for j in range(m):
        out[j] = y[j]
    for i in range(n - 1):
        h_int = t[i + 1] - t[i]
        nsub = 1
        while True:
            for j in range(m):
                yy[j] = y[j]
            hs = h_int / nsub
            worst = 0.0
            for s in range(nsub):
                flag = dp_step(yy, hs, k2, g, m, rtol, atol, &worst)
                if flag:
                    return 1
            if worst <= 1.0:
                break
            nsub *= 2
            if nsub > (1 << MAX_HALVINGS):
                return 2
        for j in range(m):
            y[j] = yy[j]
        if i + 1 == itrap:
            for j in range(0, m, 2):
                y[j + 1] = y[j + 1] - jump[j // 2] * y[j]
        big = 0.0
        for j in range(m):
            if cabs_(y[j]) > big:
                big = cabs_(y[j])
        if big > BLOWUP:
            return 1
        for j in range(m):
            out[(i + 1) * m + j] = y[j]
    return 0


def shoot_standard(psi0, dpsi0, kappa, g, strength, t, int itrap, double rtol,
                   double atol):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef int n = tt.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.full((n, 2), np.nan + 0j)
    cdef double complex y[4]
    cdef double complex jump[2]
    cdef double complex k2 = complex(kappa) ** 2
    cdef double gg = g
    cdef int status
    y[0] = psi0
    y[1] = dpsi0
    jump[0] = strength
    with nogil:
        status = march(y, 2, k2, gg, jump, &tt[0], n, itrap, rtol, atol, &out[0, 0])
    return out[:, 0].copy(), out[:, 1].copy(), status


def shoot_continued(u0, du0, v0, dv0, kappa, g, s_u, s_v, t, int itrap,
                    double rtol, double atol):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef int n = tt.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.full((n, 4), np.nan + 0j)
    cdef double complex y[4]
    cdef double complex jump[2]
    cdef double complex k2 = complex(kappa) ** 2
    cdef double gg = g
    cdef int status
    y[0] = u0
    y[1] = du0
    y[2] = v0
    y[3] = dv0
    jump[0] = s_u
    jump[1] = s_v
    with nogil:
        status = march(y, 4, k2, gg, jump, &tt[0], n, itrap, rtol, atol, &out[0, 0])
    return (out[:, 0].copy(), out[:, 1].copy(), out[:, 2].copy(), out[:, 3].copy(),
            status)
