"""Command-line interface: run, certify, constants, verify, sweep.

Exit codes: 0 success, 2 precondition violation, 3 divergence,
4 lemma margin failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_DIVERGENCE = 3
EXIT_LEMMA = 4

TAU_POLICIES = ("certified", "certified-times-factor", "explicit")


@dataclass
class RunConfig:
    dim: int = 2
    N: int = 32
    M: int = 0  # 0 means 4N + 1
    nu: float = 0.05
    tau: float = 0.0
    tau_policy: str = "certified"
    tau_factor: float = 1.0
    variant: str = ""  # empty means general-<dim>d
    steps: int = 100
    record_every: int = 1
    initial: str = "tanh-stripes"
    amplitude: float = 1.0
    init_nu: float = 0.0  # stripe width parameter; 0 means use nu
    init_path: str = ""
    seed: int = 0
    out: str = "chimex_run"
    checkpoint_every: int = 0
    oversample: int = 2

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.tau_policy not in TAU_POLICIES:
            raise ValueError(f"tau_policy must be one of {TAU_POLICIES}, got {self.tau_policy!r}")
        if self.tau_policy == "explicit" and not self.tau > 0:
            raise ValueError("tau_policy = explicit needs tau > 0")
        if self.tau_policy == "certified-times-factor" and not self.tau_factor > 0:
            raise ValueError("tau_factor must be positive")

    @property
    def grid_M(self):
        return self.M if self.M > 0 else 4 * self.N + 1

    @property
    def certificate_variant(self):
        return self.variant or f"general-{self.dim}d"

    @classmethod
    def from_mapping(cls, values):
        kinds = {f.name: f.type for f in fields(cls)}
        by_lower = {k.lower(): k for k in kinds}
        kw = {}
        for name, raw in values.items():
            key = by_lower.get(name.strip().replace("-", "_").lower())
            if key is None:
                raise ValueError(f"unknown config key {name!r}")
            typ = kinds[key]
            if not isinstance(raw, str):
                kw[key] = raw
            elif typ == "int":
                kw[key] = int(raw)
            elif typ == "float":
                kw[key] = float(raw)
            else:
                kw[key] = raw.strip()
        return cls(**kw)

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["run"] = {k: str(v) for k, v in asdict(self).items()}
        return cp


def read_config(path=None, overrides=()):
    """Flat ``key = value`` file (section ``[run]``, header optional) plus ``key=value`` overrides."""
    values = {}
    if path is not None:
        text = Path(path).read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ValueError(f"{path}: {exc}") from None
        for section in cp.sections():
            values.update(cp[section])
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    return RunConfig.from_mapping(values)


def build_problem(cfg):
    """(grid, u0, certificate or None, tau) for a run configuration."""
    from .certify import certify_field
    from .grid import make_grid
    from .stepper import make_initial

    grid = make_grid(cfg.dim, cfg.N, cfg.grid_M)
    u0 = make_initial(cfg.initial, grid, seed=cfg.seed, amplitude=cfg.amplitude,
                      nu=cfg.init_nu or cfg.nu, path=cfg.init_path or None)
    cert = None
    if cfg.tau_policy == "explicit":
        tau = cfg.tau
    else:
        cert = certify_field(u0, cfg.nu, cfg.certificate_variant)
        tau = cert.tau_max * (cfg.tau_factor if cfg.tau_policy == "certified-times-factor" else 1.0)
    return grid, u0, cert, tau


def execute(cfg, write=True):
    """Run one configuration; returns (summary dict, RunResult)."""
    from .stepper import SchemeParams, run

    grid, u0, cert, tau = build_problem(cfg)
    out = Path(cfg.out)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "config.ini", "w") as fh:
            cfg.to_ini().write(fh)
        if cert is not None:
            (out / "certificate.json").write_text(cert.to_json() + "\n")
    p = SchemeParams(cfg.nu, tau, cfg.N)
    res = run(
        u0, p, cfg.steps,
        record_every=cfg.record_every,
        oversample=cfg.oversample,
        csv_path=(out / "energy.csv") if write else None,
        checkpoint_every=cfg.checkpoint_every if write else 0,
        checkpoint_dir=(out / "checkpoints") if write else None,
    )
    summary = {"tau": tau, "tau_certified": None if cert is None else cert.tau_max, **res.summary()}
    if write:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary, res


# ---------------------------------------------------------------- commands

def cmd_run(args):
    cfg = read_config(args.config, args.set)
    summary, _ = execute(cfg)
    for k, v in summary.items():
        print(f"{k:<28} {v}")
    if summary["monotone"]:
        print("energy monotone at every step")
    else:
        print(f"energy increased first at step {summary['first_monotone_violation']}")
    if not summary["lemma_z2"]:
        print(f"discrete energy estimate failed first at step {summary['first_z2_violation']}")
        return EXIT_LEMMA
    return EXIT_OK


def cmd_certify(args):
    from .certify import certify, certify_field
    from .grid import make_grid
    from .stepper import make_initial

    if args.E0 is not None:
        variant = args.variant or f"general-{args.dim}d"
        cert = certify(variant, args.E0, args.L0, nu=args.nu, d=args.dim)
    else:
        grid = make_grid(args.dim, args.N)
        u0 = make_initial(args.initial, grid, seed=args.seed, amplitude=args.amplitude,
                          nu=args.init_nu or args.nu, path=args.init_path)
        cert = certify_field(u0, args.nu, args.variant)
    print(cert.to_json() if args.json else cert.describe())
    return EXIT_OK


def cmd_constants(args):
    from .constants import (DATA_FILE, estimate_constants, save_constants,
                            sobolev_s6)

    path = Path(args.output) if args.output else DATA_FILE
    est = estimate_constants(args.dim, ppd=args.ppd, rtol=args.rtol, workers=args.workers)
    s6 = sobolev_s6(K=args.s6_modes) if args.dim == 3 else None
    for name, e in est.items():
        print(f"{name}  value={e.value:.10g}  argmax_beta={e.argmax_beta:.4g}  "
              f"grid_max={e.grid_max:.10g}  continuum={e.continuum_limit:.10g}")
    if s6 is not None:
        print(f"S6   numeric ascent={s6:.10g}")
    save_constants(est, path, s6_numeric=s6)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args):
    from .lemmas import run_all

    reports = run_all(",".join(args.lemmas) if args.lemmas else "all", workers=args.workers)
    for r in reports:
        print(r.to_text())
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in reports], indent=2, default=str) + "\n")
    failed = [r.lemma_id for r in reports if not r.ok]
    print(f"{len(reports) - len(failed)}/{len(reports)} margins >= 0")
    return EXIT_LEMMA if failed else EXIT_OK


SWEEP_COLUMNS = ("nu", "tau_multiplier", "tau", "tau_certified", "status", "first_violation",
                 "E_initial", "E_final")


def _sweep_cell(job):
    """One (nu, multiplier) trajectory; returns a row dict and writes a per-cell file."""
    from .certify import PreconditionError
    from .stepper import DivergenceError

    cfg_dict, nu, mult, cell_path = job
    cfg = RunConfig.from_mapping({**cfg_dict, "nu": nu, "tau_policy": "certified-times-factor",
                                  "tau_factor": mult})
    row = {"nu": nu, "tau_multiplier": mult, "tau": "", "tau_certified": "", "status": "",
           "first_violation": "", "E_initial": "", "E_final": ""}
    try:
        grid, u0, cert, tau = build_problem(cfg)
        row["tau_certified"] = repr(cert.tau_max)
        row["tau"] = repr(tau)
        from .stepper import SchemeParams, run

        res = run(u0, SchemeParams(nu, tau, cfg.N), cfg.steps, record_every=cfg.steps)
        row["E_initial"] = repr(float(res.energies[0]))
        row["E_final"] = repr(float(res.energies[-1]))
        if res.monotone_ok:
            row["status"] = "monotone"
        else:
            row["status"] = "violated"
            row["first_violation"] = res.first_monotone_violation
    except DivergenceError as exc:
        row["status"] = "diverged"
        row["first_violation"] = exc.step
    except PreconditionError as exc:
        row["status"] = f"precondition: {exc}"
    with open(cell_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, SWEEP_COLUMNS)
        w.writeheader()
        w.writerow(row)
    return row


def empirical_boundary(rows):
    """Per nu: the largest multiplier below the first non-monotone one."""
    out = {}
    for nu in sorted({float(r["nu"]) for r in rows}):
        cells = sorted((float(r["tau_multiplier"]), r) for r in rows if float(r["nu"]) == nu)
        stable = None
        for mult, r in cells:
            if r["status"] != "monotone":
                break
            stable = r
        out[nu] = stable
    return out


def cmd_sweep(args):
    cfg = read_config(args.config, args.set)
    out = Path(cfg.out)
    cells = out / "cells"
    cells.mkdir(parents=True, exist_ok=True)
    nus = [float(x) for x in args.nu.split(",")] if args.nu else [cfg.nu]
    mults = [float(x) for x in args.tau_multipliers.split(",")]
    base = {k: v for k, v in asdict(cfg).items()}
    jobs = [(base, nu, m, cells / f"cell_{i:03d}_{j:03d}.csv")
            for i, nu in enumerate(nus) for j, m in enumerate(mults)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    with open(out / "config.ini", "w") as fh:
        cfg.to_ini().write(fh)
    # merge the per-cell files in job order
    with open(out / "stability_map.csv", "w", newline="") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for job in jobs:
            lines = Path(job[3]).read_text().splitlines()
            fh.write("\n".join(lines[1:]) + "\n")
    bound = empirical_boundary(rows)
    with open(out / "boundary.csv", "w", newline="") as fh:
        fh.write("nu,tau_certified,largest_stable_multiplier,largest_stable_tau\n")
        for nu, r in bound.items():
            if r is None:
                fh.write(f"{nu!r},,,\n")
            else:
                fh.write(f"{nu!r},{r['tau_certified']},{r['tau_multiplier']!r},{r['tau']}\n")
    for r in rows:
        print(f"nu={r['nu']:<8g} x{r['tau_multiplier']:<8g} tau={r['tau']:<24} {r['status']}")
    bad = [r for r in rows if r["tau_multiplier"] <= 1.0 and r["status"] == "violated"]
    if bad:
        print(f"{len(bad)} certified cells violated monotonicity")
        return EXIT_LEMMA
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _add_initial(p):
    p.add_argument("--initial", default="tanh-stripes")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--init-nu", type=float, default=0.0)
    p.add_argument("--init-path", default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="chimex", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="advance the IMEX scheme and log the energy")
    p.add_argument("--config", default=None, help="key = value file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="certified maximal time step")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--variant", default=None)
    p.add_argument("--E0", type=float, default=None, help="initial energy (skip building data)")
    p.add_argument("--L0", type=float, default=None, help="initial sup-norm")
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--json", action="store_true")
    _add_initial(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("constants", help="estimate the absolute constants for one dimension")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--ppd", type=int, default=4, help="beta grid points per decade")
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--s6-modes", type=int, default=10)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", help="numerical lemma checks")
    p.add_argument("lemmas", nargs="*", help="names or prefixes (default: all)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="stability map over nu and tau multipliers")
    p.add_argument("--config", default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--nu", default=None, help="comma list")
    p.add_argument("--tau-multipliers", default="0.5,1,10,100,1000")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    from .certify import PreconditionError
    from .stepper import DivergenceError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (PreconditionError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
