"""Numerical estimates of the absolute constants behind the certificates.

Each constant is sup over beta > 0 of a scale-free quantity

    Q(beta) = beta^e * (beta^c * S(beta))^(1/pp)

where S is a lattice sum (C2, B2, B3, B4) or the pp-th power of a kernel
L^pp norm (C1, B1). The supremum is taken over a log-uniform beta grid,
refined around the best grid point, and compared with the beta -> 0
continuum limit. Lattice sums enter through the upper end of their tail
bracket so the recorded value errs on the large side.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from scipy import integrate

from .kernels import free_space_norm, kernel_norm
from .lattice import SPHERE_AREA, Summand, adaptive_sum

DATA_FILE = Path(__file__).with_name("data") / "constants.json"

BETA_LO, BETA_HI = 1e-12, 1e2
POINTS_PER_DECADE = 4

# Aubin-Talenti constant: |u|_6 <= S |grad u|_2 on R^3
SOBOLEV_R3 = (3 * math.pi) ** -0.5 * (4 / math.sqrt(math.pi)) ** (1 / 3)


@dataclass(frozen=True)
class ConstantSpec:
    name: str
    d: int
    kind: str  # "lattice" or "kernel"
    e: float
    c: float = 0.0
    pp: float = 2.0
    summand: tuple = ()  # (a, b) of Summand with A=1, B=0, q=0


SPECS = {
    "C1": ConstantSpec("C1", 2, "kernel", 1 / 8, pp=4 / 3),
    "C2": ConstantSpec("C2", 2, "lattice", 3 / 8, 2 / 3, 4 / 3, (8 / 3, 4 / 3)),
    "B1": ConstantSpec("B1", 1, "kernel", 1 / 16, pp=4 / 3),
    "B2": ConstantSpec("B2", 1, "lattice", 3 / 16, 2 / 3, 4 / 3, (8 / 3, 4 / 3)),
    "B3": ConstantSpec("B3", 3, "lattice", 1 / 8, 0.0, 2.0, (-2.0, 2.0)),
    "B4": ConstantSpec("B4", 3, "lattice", 3 / 8, 1.0, 2.0, (4.0, 2.0)),
}
BY_DIMENSION = {1: ("B1", "B2"), 2: ("C1", "C2"), 3: ("B3", "B4")}


@dataclass
class ConstantEstimate:
    name: str
    value: float
    beta_lo: float
    beta_hi: float
    grid_points: int
    argmax_beta: float
    grid_max: float
    continuum_limit: float
    max_rel_uncertainty: float
    extra: dict = field(default_factory=dict)


def scaled_quantity(spec, beta, rtol=1e-6):
    """(central value, upper value) of Q(beta)."""
    if spec.kind == "kernel":
        kn = kernel_norm(beta, spec.d, spec.pp, rtol=rtol)
        v = beta**spec.e * kn.value
        return v, v * (1 + kn.drift)
    a, b = spec.summand
    res, _ = adaptive_sum(spec.d, Summand(a=a, beta=beta, b=b), rtol=rtol)
    pref = beta**spec.e

    def q(S):
        return pref * (beta**spec.c * S) ** (1 / spec.pp)

    return q(res.value), q(res.upper)


def continuum_limit(spec):
    """lim_{beta -> 0} Q(beta), the R^d integral the lattice sum approaches."""
    if spec.kind == "kernel":
        return free_space_norm(spec.d, spec.pp)
    a, b = spec.summand
    g = Summand(a=a, beta=1.0, b=b)
    f = lambda r: float(g(r)) * r ** (spec.d - 1)
    total = sum(
        integrate.quad(f, lo, hi, limit=200, epsabs=0, epsrel=1e-12)[0]
        for lo, hi in [(0, 0.05), (0.05, 0.2), (0.2, 1.0), (1.0, 10.0), (10.0, np.inf)]
    )
    return (SPHERE_AREA[spec.d] * total) ** (1 / spec.pp)


def _eval(args):
    name, beta, rtol = args
    return scaled_quantity(SPECS[name], beta, rtol)


def estimate_constant(name, beta_lo=BETA_LO, beta_hi=BETA_HI, ppd=POINTS_PER_DECADE,
                      rtol=1e-6, workers=1):
    """Supremum of Q over the beta grid, refined near the maximiser."""
    spec = SPECS[name]
    n = int(round(math.log10(beta_hi / beta_lo) * ppd)) + 1
    betas = np.geomspace(beta_lo, beta_hi, n)

    def evaluate(bs):
        jobs = [(name, float(b), rtol) for b in bs]
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                return list(pool.map(_eval, jobs))
        return [_eval(j) for j in jobs]

    vals = evaluate(betas)
    central = np.array([v[0] for v in vals])
    upper = np.array([v[1] for v in vals])
    i = int(np.argmax(central))
    lo = betas[max(i - 1, 0)]
    hi = betas[min(i + 1, n - 1)]
    fine = np.geomspace(lo, hi, 9)[1:-1]
    fvals = evaluate(fine)
    all_b = np.concatenate([betas, fine])
    all_c = np.concatenate([central, [v[0] for v in fvals]])
    all_u = np.concatenate([upper, [v[1] for v in fvals]])
    j = int(np.argmax(all_u))
    limit = continuum_limit(spec)
    value = max(float(all_u[j]), limit)
    unc = float(np.max((all_u - all_c) / all_c))
    return ConstantEstimate(
        name=name,
        value=value,
        beta_lo=beta_lo,
        beta_hi=beta_hi,
        grid_points=int(all_b.size),
        argmax_beta=float(all_b[j]),
        grid_max=float(all_u[j]),
        continuum_limit=float(limit),
        max_rel_uncertainty=unc,
    )


def sobolev_s6(K=10, iters=300, seed=0, widths=(0.08, 0.05, 0.03)):
    """Largest |u|_6 / |grad u|_2 found by nonlinear power iteration on T^3.

    Iterates u <- Pi_K (-Delta)^-1 (u^5 - mean u^5), normalised, over
    trigonometric polynomials with |k|_inf <= K, sampled on M = 6K + 1
    points per axis so the grid mean of u^6 is exact. Every iterate is an
    admissible function, so the result is a certified lower bound for the
    sharp mean-zero constant.
    """
    M = 6 * K + 1
    k = np.fft.fftfreq(M, 1.0 / M)
    kz = np.arange(M // 2 + 1)
    K2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + kz[None, None, :] ** 2
    kinf = np.maximum(np.maximum(np.abs(k)[:, None, None], np.abs(k)[None, :, None]), kz[None, None, :])
    lap = (2 * np.pi) ** 2 * K2
    inv = np.where((lap > 0) & (kinf <= K), 1.0 / np.where(lap > 0, lap, 1.0), 0.0)
    w = np.full(lap.shape, 2.0)
    w[..., 0] = 1.0
    x = np.arange(M) / M - 0.5
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    r2 = X**2 + Y**2 + Z**2

    def quotient(u):
        uh = sfft.rfftn(u) / u.size
        grad2 = float(np.sum(w * lap * np.abs(uh) ** 2))
        return float(np.mean(u**6)) ** (1 / 6) / math.sqrt(grad2)

    def band(u):
        return sfft.irfftn(sfft.rfftn(u) * (kinf <= K) * (K2 > 0), s=u.shape)

    starts = [np.exp(-r2 / (2 * s * s)) for s in widths]
    starts.append(np.random.default_rng(seed).standard_normal((M, M, M)))
    best = 0.0
    for u in starts:
        u = band(u)
        for _ in range(iters):
            u = sfft.irfftn(sfft.rfftn(u**5) * inv, s=u.shape)
            u /= np.abs(u).max()
        best = max(best, quotient(u))
    return best


def derived_3d(consts, s6=None):
    """B3', B4', B5' from B3, B4 and the Sobolev constant."""
    if s6 is None:
        s6 = consts.get("S6", SOBOLEV_R3)
    B3, B4 = consts["B3"], consts["B4"]
    return {
        "B3p": math.sqrt(2.0) * B3,
        "B4p": 2.0**1.5 * s6**3 * B4,
        "B5p": 5.0**0.25 * B4,
    }


def estimate_constants(d, **kw):
    """ConstantEstimate for each constant used in dimension ``d``."""
    return {name: estimate_constant(name, **kw) for name in BY_DIMENSION[d]}


def save_constants(estimates, path=DATA_FILE, s6_numeric=None):
    """Merge ``estimates`` into the constants file at ``path``."""
    path = Path(path)
    data = json.loads(path.read_text()) if path.exists() else {}
    for name, est in estimates.items():
        data[name] = asdict(est)
    if s6_numeric is not None:
        data["S6"] = {
            "value": max(SOBOLEV_R3, s6_numeric),
            "r3_sharp": SOBOLEV_R3,
            "numeric_ascent": s6_numeric,
        }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data


def load_constants(path=DATA_FILE):
    """Constant name -> value (plus derived 3D primes when B3, B4 exist)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `chimex constants --dim D` first")
    raw = json.loads(path.read_text())
    out = {k: float(v["value"]) for k, v in raw.items() if isinstance(v, dict) and "value" in v}
    if "B3" in out and "B4" in out:
        out.update(derived_3d(out, out.get("S6")))
    return out


def load_raw(path=DATA_FILE):
    return json.loads(Path(path).read_text())
