"""NumPy implementations of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np


def _summand(k2, A, B, q, a, beta, b):
    s2 = 4.0 * math.pi**2 * k2
    base = np.abs(A + B * s2)
    with np.errstate(divide="ignore"):
        val = np.exp(q * np.log(base) + 0.5 * a * np.log(s2) - b * np.log1p(beta * s2 * s2))
    return np.where(base == 0.0, 0.0, val)


def lattice_sum(d, rmin, rmax, kmax, A, B, q, a, beta, b):
    """Sum |A + B s^2|^q s^a (1 + beta s^4)^-b, s = 2 pi |k|, over lattice points.

    Same domain as the compiled version: k != 0, rmin <= |k| <= rmax,
    |k|_inf <= kmax. Vectorised one slab (fixed first index) at a time.
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    K = int(kmax)
    if rmax < 1e300:
        K = min(K, int(math.floor(rmax)))
    lo2, hi2 = rmin * rmin, rmax * rmax
    if K < 1:
        return 0.0
    ks = np.arange(-K, K + 1, dtype=np.float64)

    def masked(k2):
        keep = (k2 > 0) & (k2 >= lo2) & (k2 <= hi2)
        return float(_summand(k2[keep], A, B, q, a, beta, b).sum())

    if d == 1:
        return masked(ks * ks)
    if d == 2:
        return masked(ks[:, None] ** 2 + ks[None, :] ** 2)
    plane = ks[:, None] ** 2 + ks[None, :] ** 2
    total = 0.0
    for k1 in range(0, K + 1):
        if k1 * k1 > hi2:
            break
        w = 1.0 if k1 == 0 else 2.0
        total += w * masked(plane + float(k1 * k1))
    return total


def nonlinear_potential(u, out):
    """Write u^3 - u into ``out``; return (sum of (u^2-1)^2/4, max |u|)."""
    if out.shape[0] != u.shape[0]:
        raise ValueError("output buffer has the wrong length")
    u2 = u * u
    np.multiply(u, u2 - 1.0, out=out)
    pot = 0.25 * float(np.sum((u2 - 1.0) ** 2))
    vmax = float(np.max(np.abs(u))) if u.size else 0.0
    return pot, vmax
