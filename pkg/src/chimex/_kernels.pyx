# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: radial lattice sums and the fused cubic/potential pass.

The pure-Python twin lives in ``_kernels_py``; both expose identical
signatures and are selected in ``_backend``.
"""

from libc.math cimport exp, log, fabs, floor, M_PI


cdef inline double _summand(double k2, double A, double B, double q,
                            double a, double beta, double b) nogil:
    cdef double s2 = 4.0 * M_PI * M_PI * k2
    cdef double base = fabs(A + B * s2)
    if base == 0.0:
        return 0.0
    return exp(q * log(base) + 0.5 * a * log(s2) - b * log(1.0 + beta * s2 * s2))


cdef inline double _perm2(long i, long j) nogil:
    return 1.0 if i == j else 2.0


cdef inline double _perm3(long i, long j, long l) nogil:
    if i == j and j == l:
        return 1.0
    if i == j or j == l:
        return 3.0
    return 6.0


cdef inline double _signs(long i) nogil:
    return 2.0 if i != 0 else 1.0


def lattice_sum(int d, double rmin, double rmax, long kmax,
                double A, double B, double q, double a, double beta, double b):
    """Sum |A + B s^2|^q s^a (1 + beta s^4)^-b, s = 2 pi |k|, over lattice points.

    The sum runs over k in Z^d, k != 0, rmin <= |k| <= rmax, |k|_inf <= kmax.
    Only the fundamental chamber 0 <= k_1 <= ... <= k_d is visited.
    """
    if d < 1 or d > 3:
        raise ValueError("d must be 1, 2 or 3")
    cdef double lo2 = rmin * rmin
    cdef double hi2 = rmax * rmax
    cdef long K = kmax
    cdef long rcap = <long> floor(rmax) if rmax < 1e300 else K
    if rcap < K:
        K = rcap
    cdef long i, j, l
    cdef double k2, w, row, total = 0.0
    with nogil:
        if d == 1:
            for i in range(1, K + 1):
                k2 = <double> (i * i)
                if k2 < lo2 or k2 > hi2:
                    continue
                total += 2.0 * _summand(k2, A, B, q, a, beta, b)
        elif d == 2:
            for i in range(0, K + 1):
                row = 0.0
                for j in range(i, K + 1):
                    k2 = <double> (i * i + j * j)
                    if k2 > hi2:
                        break
                    if k2 == 0.0 or k2 < lo2:
                        continue
                    w = _perm2(i, j) * _signs(i) * _signs(j)
                    row += w * _summand(k2, A, B, q, a, beta, b)
                total += row
        else:
            for i in range(0, K + 1):
                if 3.0 * i * i > hi2:
                    break
                for j in range(i, K + 1):
                    if <double> (i * i + 2 * j * j) > hi2:
                        break
                    row = 0.0
                    for l in range(j, K + 1):
                        k2 = <double> (i * i + j * j + l * l)
                        if k2 > hi2:
                            break
                        if k2 == 0.0 or k2 < lo2:
                            continue
                        w = _perm3(i, j, l) * _signs(i) * _signs(j) * _signs(l)
                        row += w * _summand(k2, A, B, q, a, beta, b)
                    total += row
    return total


def nonlinear_potential(const double[::1] u, double[::1] out):
    """Write u^3 - u into ``out``; return (sum of (u^2-1)^2/4, max |u|)."""
    cdef Py_ssize_t n = u.shape[0], i
    cdef double v, v2, pot = 0.0, vmax = 0.0
    if out.shape[0] != n:
        raise ValueError("output buffer has the wrong length")
    with nogil:
        for i in range(n):
            v = u[i]
            v2 = v * v
            out[i] = v * v2 - v
            pot += 0.25 * (v2 - 1.0) * (v2 - 1.0)
            if fabs(v) > vmax:
                vmax = fabs(v)
    return pot, vmax
