"""L^p norms of the mean-free resolvent kernel of 1 + beta Delta^2 on T^d.

K~_beta(x) = sum_{k != 0} (1 + beta (2 pi |k|)^4)^-1 e^{2 pi i k.x}.

By Poisson summation K~_beta = sum_n K_beta(x + n) - 1, where the
free-space kernel K_beta(x) = eps^-d K1(|x|/eps), eps = beta^(1/4), has a
closed form and decays like exp(-|x|/(sqrt(2) eps)). Three evaluation
routes are used:

* ``lattice``: p = 2 and p = inf are exact sums over Z^d
  (|K~|_inf = K~(0) because every coefficient is positive).
* ``rays``: physical-space image sum integrated along rays from the
  origin through a symmetry chamber of the cell. Accurate while few
  images are needed (small beta).
* ``grid``: spectral synthesis of K~ on an M^d grid with the multiplier
  folded over the nearest aliases, then grid quadrature (moderate and
  large beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy import optimize, special

from .lattice import Summand, adaptive_sum

SQ2 = math.sqrt(2.0)

# Largest image index the ray route will use per dimension.
MAX_IMAGES = {1: 64, 2: 4, 3: 1}
# Default grid sizes of the spectral route.
GRID_M = {1: 2**16, 2: 1024, 3: 256}
# Below this many grid points per kernel width the rays are preferred.
GRID_MIN_RES = 16.0
RAY_ANGLES = {1: 1, 2: 24, 3: 12}


def free_kernel(d):
    """Radial profile K1(r) of the beta = 1 free-space kernel in R^d."""
    if d == 1:
        return lambda r: np.exp(-r / SQ2) * (np.cos(r / SQ2) + np.sin(r / SQ2)) / (2 * SQ2)
    if d == 2:
        return lambda r: -special.kei(np.minimum(r, 700.0)) / (2 * math.pi)
    if d == 3:

        def k3(r):
            r = np.asarray(r, dtype=np.float64)
            safe = np.where(r > 0, r, 1.0)
            return np.where(
                r > 0,
                np.exp(-safe / SQ2) * np.sin(safe / SQ2) / (4 * math.pi * safe),
                1.0 / (4 * math.pi * SQ2),
            )

        return k3
    raise ValueError("d must be 1, 2 or 3")


def multiplier(k2, beta):
    s2 = (2 * math.pi) ** 2 * k2
    return 1.0 / (1.0 + beta * s2 * s2)


def image_count(beta, d, tol=1e-13):
    """Images per axis so the neglected ones contribute below ``tol`` (relative)."""
    eps = beta**0.25
    # |K1(r)| <= e^{-r/sqrt 2}; the first neglected shell sits at distance n + 1/2
    n = 0
    while math.exp(-(n + 0.5) / (SQ2 * eps)) * (2 * n + 3) ** d > tol:
        n += 1
    return n


def periodic_kernel(points, beta, n_img=None):
    """K~_beta at ``points`` (shape (..., d)) by image summation."""
    points = np.asarray(points, dtype=np.float64)
    d = points.shape[-1]
    if n_img is None:
        n_img = image_count(beta, d)
    eps = beta**0.25
    K1 = free_kernel(d)
    rng = np.arange(-n_img, n_img + 1)
    shifts = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    out = np.zeros(points.shape[:-1])
    for n in shifts:
        r = np.sqrt(np.sum((points + n) ** 2, axis=-1)) / eps
        # e^{-r/sqrt 2} < 1e-17 beyond r = 56: skip the special-function call there
        near = r < 56.0
        if near.all():
            out += K1(r)
        elif near.any():
            out[near] += K1(r[near])
    return out / eps**d - 1.0


def _chamber_directions(d, n_ang):
    """Ray directions e (first component 1) and angular weights for the
    symmetry chamber x_1 >= x_2 >= ... >= x_d >= 0 of the cell."""
    if d == 1:
        return np.ones((1, 1)), np.array([2.0])
    x, w = np.polynomial.legendre.leggauss(n_ang)
    x, w = 0.5 * (x + 1), 0.5 * w
    if d == 2:
        return np.stack([np.ones_like(x), x], axis=1), 8.0 * w
    U, W = np.meshgrid(x, x, indexing="ij")
    WU, WW = np.meshgrid(w, w, indexing="ij")
    e = np.stack([np.ones(U.size), U.ravel(), (U * W).ravel()], axis=1)
    return e, 48.0 * (WU * WW * U).ravel()


def _ray_panels(t_roots, scale, t_max=0.5, n_geo=24):
    edges = {0.0, t_max}
    edges.update(np.geomspace(min(scale * 1e-4, t_max / 10), t_max, n_geo).tolist())
    edges.update(np.linspace(0, t_max, 9).tolist())
    edges.update(float(t) for t in t_roots if 0 < t < t_max)
    return np.array(sorted(edges))


def _ray_integral(e, beta, ps, n_img, order):
    """int_0^{1/2} |K~(t e)|^p t^{d-1} dt for each p, panels split at sign changes."""
    d = e.size
    eps = beta**0.25
    rho = float(np.linalg.norm(e))

    def f(t):
        return periodic_kernel(np.multiply.outer(np.atleast_1d(t), e), beta, n_img)

    probe = np.geomspace(eps * 1e-3 / rho, 0.5, 200)
    vals = f(probe)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        roots.append(optimize.brentq(lambda t: float(f(t)[0]), probe[i], probe[i + 1], xtol=1e-15))
    edges = _ray_panels(roots, eps / rho)
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (b - a) * (x + 1) + a).ravel()
    wt = (0.5 * (b - a) * w).ravel() * t ** (d - 1)
    F = np.abs(f(t))
    return np.array([np.sum(wt * F**p) for p in ps])


def norm_rays(beta, d, ps, n_ang=None, order=20, n_img=None):
    """int_cell |K~_beta|^p for each finite p in ``ps``, by ray quadrature."""
    ps = np.atleast_1d(np.asarray(ps, dtype=np.float64))
    if n_img is None:
        n_img = image_count(beta, d)
    if n_ang is None:
        n_ang = RAY_ANGLES[d]
    dirs, wang = _chamber_directions(d, n_ang)
    total = np.zeros(ps.size)
    for e, w in zip(dirs, wang):
        total += w * _ray_integral(e, beta, ps, n_img, order)
    return total


def norm_grid(beta, d, ps, M=None):
    """Grid means of |K~|^p for each p in ``ps`` (the max for p = inf),
    from a spectral synthesis with the multiplier folded over nearest aliases."""
    ps = np.atleast_1d(np.asarray(ps, dtype=np.float64))
    M = GRID_M[d] if M is None else M
    k_full = np.fft.fftfreq(M, 1.0 / M)
    k_half = np.arange(M // 2 + 1, dtype=np.float64)
    axes = [k_full] * (d - 1) + [k_half]
    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    mf = np.zeros(tuple(a.size for a in axes))
    shifts = np.stack(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij"), -1).reshape(-1, d)
    for n in shifts:
        k2 = sum((g + M * ni) ** 2 for g, ni in zip(grids, n))
        mf += multiplier(k2, beta)
    mf.flat[0] -= 1.0
    K = np.abs(sfft.irfftn(mf * M**d, s=(M,) * d))
    return np.array([K.max() if math.isinf(p) else np.mean(K**p) for p in ps])


def lattice_norm(beta, d, p, rtol=1e-6, R_cap=None):
    """Exact-sum route for p = 2 and p = inf; returns (value, LatticeSum, converged)."""
    if p == 2:
        res, ok = adaptive_sum(d, Summand(beta=beta, b=2.0), rtol=rtol, R_cap=R_cap)
        return math.sqrt(res.value), res, ok
    if math.isinf(p):
        res, ok = adaptive_sum(d, Summand(beta=beta, b=1.0), rtol=rtol, R_cap=R_cap)
        return res.value, res, ok
    raise ValueError("lattice route only covers p = 2 and p = inf")


@dataclass(frozen=True)
class KernelNorm:
    beta: float
    d: int
    p: float
    value: float
    method: str
    drift: float

    @property
    def scaled(self):
        """beta^{d(1/4 - 1/(4p))} |K~|_p, bounded uniformly for small beta."""
        return self.value * self.beta ** lemma_exponent(self.d, self.p)


def lemma_exponent(d, p):
    return d * (0.25 - (0.0 if math.isinf(p) else 0.25 / p))


def physical_method(beta, d):
    """Rays while few images are needed and the grid under-resolves eps."""
    eps = beta**0.25
    if image_count(beta, d) <= MAX_IMAGES[d] and eps * GRID_M[d] < GRID_MIN_RES:
        return "rays"
    return "grid"


def kernel_norms(beta, d, ps, method="auto", rtol=1e-6):
    """|K~_beta|_{L^p(T^d)} for several p, each with a refinement drift.

    ``auto`` sends p = 2 and p = inf to exact lattice sums and the other
    exponents to one shared physical-space evaluation.
    """
    ps = [float(p) for p in ps]
    out = {}
    phys = []
    for p in ps:
        if method == "lattice" or (method == "auto" and (p == 2 or math.isinf(p))):
            val, res, _ = lattice_norm(beta, d, p, rtol=rtol)
            if p == 2:
                drift = 0.5 * (math.sqrt(res.upper) - math.sqrt(res.lower)) / val
            else:
                drift = 0.5 * (res.upper - res.lower) / val
            out[p] = KernelNorm(beta, d, p, val, "lattice", drift)
        else:
            phys.append(p)
    if phys:
        m = physical_method(beta, d) if method == "auto" else method
        if m == "rays":
            finite = [p for p in phys if not math.isinf(p)]
            base = RAY_ANGLES[d]
            a = norm_rays(beta, d, finite, n_ang=base)
            b = norm_rays(beta, d, finite, n_ang=base + base // 2, order=28)
            for p, va, vb in zip(finite, a, b):
                va, vb = va ** (1 / p), vb ** (1 / p)
                out[p] = KernelNorm(beta, d, p, vb, m, abs(vb - va) / vb)
            if any(math.isinf(p) for p in phys):
                val = float(periodic_kernel(np.zeros((1, d)), beta)[0])
                out[math.inf] = KernelNorm(beta, d, math.inf, val, m, 0.0)
        elif m == "grid":
            M = GRID_M[d]
            a = norm_grid(beta, d, phys, M // 2)
            b = norm_grid(beta, d, phys, M)
            for p, va, vb in zip(phys, a, b):
                if not math.isinf(p):
                    va, vb = va ** (1 / p), vb ** (1 / p)
                out[p] = KernelNorm(beta, d, p, vb, m, abs(vb - va) / vb)
        else:
            raise ValueError(f"unknown method {m!r}")
    return [out[p] for p in ps]


def kernel_norm(beta, d, p, method="auto", rtol=1e-6):
    """|K~_beta|_{L^p(T^d)} with a refinement drift estimate."""
    return kernel_norms(beta, d, [p], method=method, rtol=rtol)[0]


def free_space_norm(d, p):
    """|K1|_{L^p(R^d)}: the beta -> 0 limit of beta^{exponent} |K~_beta|_p."""
    from scipy import integrate

    K1 = free_kernel(d)
    area = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[d]
    if math.isinf(p):
        return float(K1(0.0))
    # split at the sign changes of K1 (first few dozen suffice, the rest is e^-30 small)
    zeros = {1: [SQ2 * (math.pi * j - math.pi / 4) for j in range(1, 12)],
             3: [SQ2 * math.pi * j for j in range(1, 12)]}.get(d)
    if zeros is None:
        probe = np.linspace(1e-6, 60, 60001)
        v = K1(probe)
        zeros = [optimize.brentq(lambda r: float(K1(r)), probe[i], probe[i + 1])
                 for i in np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]]
    edges = [0.0, 1e-3] + [z for z in zeros if z < 60] + [60.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(lambda r: abs(float(K1(r))) ** p * r ** (d - 1), a, b,
                                limit=200, epsabs=0, epsrel=1e-10)[0]
    return (area * total) ** (1 / p)
