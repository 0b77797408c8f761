"""First-order IMEX Fourier-spectral stepping for Cahn-Hilliard.

Each step solves (1 + nu tau Delta^2) u_{n+1} = u_n + tau Delta Pi_N f(u_n)
mode by mode, with f(u) = u^3 - u evaluated on the collocation grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .energy import (
    EnergyRecord,
    is_monotone,
    practical_condition,
    z2_terms,
)
from .grid import Field, project_N, read_field, subtract_mean, sup_norm, write_field

DIVERGENCE_LINF = 1e6
MEAN_TOL = 1e-10

INITIAL_KINDS = ("zero", "single-mode", "random-bandlimited", "tanh-stripes", "from-file")


class DivergenceError(RuntimeError):
    """Raised when the iterate blows up; ``step`` is the first bad index."""

    def __init__(self, step, reason):
        super().__init__(f"divergence at step {step}: {reason}")
        self.step = step
        self.reason = reason


@dataclass(frozen=True)
class SchemeParams:
    nu: float
    tau: float
    N: int

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")


@dataclass(frozen=True)
class InitialData:
    kind: str = "tanh-stripes"
    seed: int = 0
    amplitude: float = 1.0
    path: str | None = None
    nu: float | None = None

    def build(self, grid):
        return make_initial(self.kind, grid, self.seed, self.amplitude, nu=self.nu, path=self.path)


def double_well_f(u):
    """Pointwise u^3 - u."""
    flat = np.ascontiguousarray(u.values).reshape(-1)
    out = np.empty_like(flat)
    kernels.nonlinear_potential(flat, out)
    return Field(u.grid, values=out.reshape(u.grid.shape))


def make_initial(kind, grid, seed=0, amplitude=1.0, nu=None, path=None):
    """Mean-zero initial field in X_N.

    ``tanh-stripes`` is amplitude * tanh(cos(2 pi x_1) / (2 pi sqrt(2 nu))),
    whose walls at x_1 = +-1/4 have the equilibrium width sqrt(2 nu);
    nu defaults to 0.01.
    """
    if kind == "zero":
        return Field.zeros(grid)
    if kind == "single-mode":
        u = Field.from_function(grid, lambda x, *rest: amplitude * np.cos(2 * np.pi * x))
    elif kind == "tanh-stripes":
        width = 2 * np.pi * math.sqrt(2.0 * (0.01 if nu is None else nu))
        u = Field.from_function(grid, lambda x, *rest: amplitude * np.tanh(np.cos(2 * np.pi * x) / width))
    elif kind == "random-bandlimited":
        rng = np.random.default_rng(seed)
        shp = grid.spectral_shape
        hat = (rng.standard_normal(shp) + 1j * rng.standard_normal(shp)) / (1.0 + grid.k2)
        u = subtract_mean(project_N(Field(grid, hat=hat)))
        # round trip through values so the Hermitian-redundant slots are consistent
        u = subtract_mean(project_N(Field(grid, values=u.values)))
        s = sup_norm(u, 4)
        return Field(grid, hat=u.hat * (amplitude / s)) if s > 0 else u
    elif kind == "from-file":
        if path is None:
            raise ValueError("from-file initial data needs a path")
        u = read_field(path)
        if u.grid != grid:
            raise ValueError(f"{path}: grid {u.grid} does not match {grid}")
    else:
        raise ValueError(f"unknown initial data kind {kind!r}; choose from {INITIAL_KINDS}")
    return subtract_mean(project_N(u))


class Propagator:
    """Diagonal spectral update with precomputed multipliers."""

    def __init__(self, grid, p, nonlinear=True):
        if p.N > grid.N:
            raise ValueError(f"scheme cutoff N={p.N} exceeds grid cutoff {grid.N}")
        self.grid = grid
        self.p = p
        self.nonlinear = nonlinear
        lap = grid.lap_symbol
        mask = grid.mask(p.N)
        denom = 1.0 + p.nu * p.tau * lap * lap
        self.a = np.where(mask, 1.0 / denom, 0.0)
        self.b = np.where(mask, -p.tau * lap / denom, 0.0)
        self._buf = np.empty(grid.size)

    def nonlinear_pass(self, values):
        """Fill the f(u) buffer; return (mean potential, grid max |u|)."""
        pot, vmax = kernels.nonlinear_potential(values.reshape(-1), self._buf)
        return pot / self.grid.size, vmax

    def advance(self, hat):
        """New spectrum from u_n's spectrum, using the last nonlinear pass."""
        if not self.nonlinear:
            return self.a * hat
        fhat = self.grid.forward_band(self._buf.reshape(self.grid.shape), self.p.N)
        return self.a * hat + self.b * fhat

    def synthesize(self, hat):
        """Grid values of a spectrum produced by ``advance``."""
        return self.grid.backward_band(hat, self.p.N)


def _check_mean(u):
    m = abs(u.hat.flat[0])
    if m > MEAN_TOL:
        raise ValueError(f"input field has mean {m:.3e}; the scheme expects mean-zero data")


def step(u_n, p, nonlinear=True):
    """One IMEX step. ``nonlinear=False`` drops f for linear-decay checks."""
    _check_mean(u_n)
    prop = Propagator(u_n.grid, p, nonlinear)
    prop.nonlinear_pass(np.ascontiguousarray(u_n.values))
    return Field(u_n.grid, hat=prop.advance(u_n.hat))


@dataclass
class RunResult:
    final: Field
    records: list
    energies: np.ndarray
    masses: np.ndarray
    monotone_ok: bool
    first_monotone_violation: int | None
    z2_ok: bool
    first_z2_violation: int | None
    implied_decrease_ok: bool
    checkpoints: list = field(default_factory=list)

    @property
    def max_abs_mass(self):
        return float(np.max(np.abs(self.masses)))

    def summary(self):
        return {
            "steps": len(self.energies) - 1,
            "E_initial": float(self.energies[0]),
            "E_final": float(self.energies[-1]),
            "monotone": self.monotone_ok,
            "first_monotone_violation": self.first_monotone_violation,
            "lemma_z2": self.z2_ok,
            "first_z2_violation": self.first_z2_violation,
            "practical_implies_decrease": self.implied_decrease_ok,
            "max_abs_mass": self.max_abs_mass,
            "recorded_steps": len(self.records),
        }


def _diff_norm2(grid, h1, h0):
    d = h1 - h0
    return float(np.sum(grid.weights * (d.real**2 + d.imag**2)))


def _grad_energy(grid, hat, nu):
    return 0.5 * nu * float(np.sum(grid.weights * grid.lap_symbol * (hat.real**2 + hat.imag**2)))


def run(
    u0,
    p,
    n_steps,
    record_every=1,
    grid=None,
    oversample=2,
    csv_path=None,
    checkpoint_every=0,
    checkpoint_dir=None,
):
    """Advance ``n_steps`` steps, checking energy monotonicity at every step.

    Full records (oversampled sup-norms, discrete energy estimate,
    practical condition) are taken at step 0, every ``record_every`` steps,
    and at the last step. Raises DivergenceError when |u|_inf > 1e6 or the
    energy stops being finite.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if isinstance(u0, InitialData):
        if grid is None:
            raise ValueError("InitialData needs a grid")
        u0 = u0.build(grid)
    _check_mean(u0)
    g = u0.grid
    prop = Propagator(g, p)
    nu, tau = p.nu, p.tau

    hat = np.array(u0.hat)
    vals = np.ascontiguousarray(u0.values)
    pot, _ = prop.nonlinear_pass(vals)
    grad = _grad_energy(g, hat, nu)
    E = grad + pot
    energies = np.empty(n_steps + 1)
    masses = np.empty(n_steps + 1)
    energies[0] = E
    masses[0] = float(np.mean(vals))

    def oversampled_sup(h):
        return sup_norm(Field(g, hat=h), oversample)

    sup_prev = oversampled_sup(hat)
    sup_prev_step = 0
    records = [
        EnergyRecord(0, 0.0, E, masses[0], 0.0, sup_prev, math.sqrt(2 * grad / nu),
                     0.0, 0.0, True, practical_condition(sup_prev, nu, tau), True)
    ]

    csv_fh = None
    if csv_path is not None:
        csv_fh = open(csv_path, "w")
        csv_fh.write(",".join(EnergyRecord.CSV_COLUMNS) + "\n")
        csv_fh.write(records[0].csv_row() + "\n")
    checkpoints = []
    if checkpoint_every and checkpoint_dir is not None:
        Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)

    mono_ok, first_mono = True, None
    z2_ok, first_z2 = True, None
    implied_ok = True
    try:
        for n in range(n_steps):
            hat_new = prop.advance(hat)
            vals_new = prop.synthesize(hat_new)
            pot_new, vmax = prop.nonlinear_pass(vals_new)
            grad_new = _grad_energy(g, hat_new, nu)
            E_new = grad_new + pot_new
            if not (vmax <= DIVERGENCE_LINF) or not math.isfinite(E_new):
                raise DivergenceError(n + 1, f"|u|_inf = {vmax:.3e}, E = {E_new!r}")
            energies[n + 1] = E_new
            masses[n + 1] = float(np.mean(vals_new))
            mono = is_monotone(E, E_new)
            if not mono and mono_ok:
                mono_ok, first_mono = False, n + 1

            if (n + 1) % record_every == 0 or n + 1 == n_steps:
                sup_n = sup_prev if sup_prev_step == n else oversampled_sup(hat)
                sup_new = oversampled_sup(hat_new)
                diff2 = _diff_norm2(g, hat_new, hat)
                lhs, rhs, ok = z2_terms(E, E_new, diff2, sup_n, sup_new, nu, tau)
                practical = practical_condition(sup_n, nu, tau) and practical_condition(sup_new, nu, tau)
                if practical and ok and not mono:
                    implied_ok = False
                if not ok and z2_ok:
                    z2_ok, first_z2 = False, n + 1
                rec = EnergyRecord(
                    n + 1, (n + 1) * tau, E_new, masses[n + 1], math.sqrt(diff2), sup_new,
                    math.sqrt(2 * grad_new / nu), lhs, rhs, ok, practical, mono,
                )
                records.append(rec)
                if csv_fh is not None:
                    csv_fh.write(rec.csv_row() + "\n")
                sup_prev, sup_prev_step = sup_new, n + 1

            if checkpoint_every and checkpoint_dir is not None and (n + 1) % checkpoint_every == 0:
                path = Path(checkpoint_dir) / f"u_{n + 1:08d}.chk"
                write_field(path, Field(g, values=vals_new))
                checkpoints.append(str(path))

            hat, vals, E = hat_new, vals_new, E_new
    finally:
        if csv_fh is not None:
            csv_fh.close()

    return RunResult(
        final=Field(g, values=vals, hat=hat),
        records=records,
        energies=energies,
        masses=masses,
        monotone_ok=mono_ok,
        first_monotone_violation=first_mono,
        z2_ok=z2_ok,
        first_z2_violation=first_z2,
        implied_decrease_ok=implied_ok,
        checkpoints=checkpoints,
    )


def write_energy_csv(path, records):
    with open(path, "w") as fh:
        fh.write(",".join(EnergyRecord.CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(r.csv_row() + "\n")
