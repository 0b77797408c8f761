"""Radial lattice sums over Z^d with integral-comparison tail brackets.

Summands have the form g(k) = |A + B s^2|^q s^a (1 + beta s^4)^-b with
s = 2 pi |k|. For a radial profile G(r) = g(r) that is non-increasing on
[R - sqrt(d), inf), comparing each point with its unit cell gives

    w int_{R + c}^inf G(r + c) r^{d-1} dr  <=  sum_{|k| > R} G(|k|)
        <=  w int_{R - c}^inf G(r - c) r^{d-1} dr,

where c = sqrt(d)/2 is the cell half-diagonal and w the area of the unit
sphere in R^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _backend

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


@dataclass(frozen=True)
class Summand:
    """|A + B s^2|^q s^a (1 + beta s^4)^-b as a function of r = |k|."""

    A: float = 1.0
    B: float = 0.0
    q: float = 0.0
    a: float = 0.0
    beta: float = 0.0
    b: float = 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        s2 = (2.0 * math.pi * r) ** 2
        base = np.abs(self.A + self.B * s2)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(
                self.q * np.log(base) + 0.5 * self.a * np.log(s2) - self.b * np.log1p(self.beta * s2 * s2)
            )
        return np.where(base == 0.0, 0.0, out)

    @property
    def args(self):
        return (self.A, self.B, self.q, self.a, self.beta, self.b)


def power_summand(s):
    """Summand equal to |k|^-s."""
    return _Scaled(Summand(a=-s), (2.0 * math.pi) ** s)


@dataclass(frozen=True)
class _Scaled:
    base: Summand
    factor: float

    def __call__(self, r):
        return self.factor * self.base(r)

    @property
    def args(self):
        return self.base.args


def _scale(g):
    return g.factor if isinstance(g, _Scaled) else 1.0


def lattice_sum(d, g, R=math.inf, rmin=0.0, kmax=None, backend=None):
    """Finite sum of g over k != 0 with rmin <= |k| <= R and |k|_inf <= kmax."""
    if kmax is None:
        if math.isinf(R):
            raise ValueError("need a finite R or kmax")
        kmax = int(math.floor(R))
    k = _backend.get(backend)
    return _scale(g) * k.lattice_sum(d, float(rmin), float(min(R, 1e300)), int(kmax), *map(float, g.args))


@dataclass(frozen=True)
class LatticeSum:
    """Head over |k| <= R plus a bracket [tail_lo, tail_hi] for |k| > R."""

    head: float
    tail_lo: float
    tail_hi: float
    R: float

    @property
    def lower(self):
        return self.head + self.tail_lo

    @property
    def upper(self):
        return self.head + self.tail_hi

    @property
    def value(self):
        return self.head + 0.5 * (self.tail_lo + self.tail_hi)

    @property
    def rel_width(self):
        return (self.tail_hi - self.tail_lo) / self.lower if self.lower > 0 else math.inf

    @property
    def tail_ratio(self):
        return self.tail_hi / self.head if self.head > 0 else math.inf


def is_decreasing_beyond(g, r0, r1=None, samples=400):
    """Sampled check that g is non-increasing on [r0, r1].

    For a Summand whose factor |A + B s^2| vanishes at some radius beyond
    r0 the answer is False regardless of sampling.
    """
    args = getattr(g, "args", None)
    if args is not None:
        A, B, q = args[:3]
        if q != 0 and A * B < 0 and math.sqrt(-A / B) / (2 * math.pi) >= r0:
            return False
    r0 = max(r0, 1e-3)
    r1 = 64.0 * r0 if r1 is None else r1
    v = g(np.geomspace(r0, r1, samples))
    return bool(np.all(np.diff(v) <= 1e-15 * np.abs(v[:-1])))


def _radial_integral(g, d, r0, shift):
    w = SPHERE_AREA[d]

    def integrand(r):
        return float(g(r + shift)) * r ** (d - 1)

    # split at a few decades so quad sees the transition scale
    edges = [r0] + [r0 * 10.0**j for j in range(1, 7)]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(integrand, lo, hi, limit=200, epsabs=0.0, epsrel=1e-11)[0]
    L = edges[-1]

    def mapped(t):
        # r = L / t maps [L, inf) onto (0, 1]
        return integrand(L / t) * L / (t * t) if t > 0 else 0.0

    total += integrate.quad(mapped, 0.0, 1.0, limit=200, epsabs=0.0, epsrel=1e-10)[0]
    return w * total


def tail_bracket(d, g, R):
    """Rigorous (up to quadrature) bounds on sum_{|k| > R} g(|k|)."""
    c = 0.5 * math.sqrt(d)
    if R - 2 * c <= 0:
        raise ValueError(f"R={R} too small for the cell comparison in d={d}")
    if not is_decreasing_beyond(g, R - 2 * c):
        raise ValueError(f"summand is not decreasing beyond r={R - 2 * c:g}; raise R")
    hi = _radial_integral(g, d, R - c, -c)
    lo = _radial_integral(g, d, R + c, +c)
    return lo, hi


def sum_with_tail(d, g, R, rmin=0.0, backend=None):
    """Head over rmin <= |k| <= R and a tail bracket for |k| > R."""
    head = lattice_sum(d, g, R=R, rmin=rmin, backend=backend)
    lo, hi = tail_bracket(d, g, R)
    return LatticeSum(head, lo, hi, float(R))


def adaptive_sum(d, g, rtol=1e-6, R0=16.0, R_cap=None, rmin=0.0, backend=None):
    """Double R from R0 until the bracket width is below ``rtol``.

    Returns (LatticeSum, converged). R_cap defaults to a budget that keeps
    the head enumeration around 10^8 points.
    """
    if R_cap is None:
        R_cap = {1: 2.0**22, 2: 2.0**13, 3: 2.0**10}[d]
    R = float(R0)
    while True:
        try:
            res = sum_with_tail(d, g, R, rmin=rmin, backend=backend)
        except ValueError:
            if R >= R_cap:
                raise
            R = min(2 * R, R_cap)
            continue
        if res.rel_width <= rtol:
            return res, True
        if R >= R_cap:
            return res, False
        R = min(2 * R, R_cap)
