"""End-to-end acceptance criteria, one summary line per criterion.

Each test appends ``CRITERION n: PASS|FAIL ...`` to the terminal summary
before asserting, so the report is complete even when a criterion fails.
"""

import math
import time

import numpy as np
import pytest
import scipy.fft as sfft

from chimex.certify import (
    certify_field,
    eta_constants_check,
    tau_max_2d_nu1_first,
    tau_max_2d_nu1_second,
)
from chimex.grid import Field, make_grid
from chimex.lattice import lattice_sum, power_summand
from chimex.lemmas import (
    SQ2INV,
    lemma_exponent,
    run_all,
    verify_m003,
    verify_prop_Eu,
    verify_prop_Eu_remark,
)
from chimex.stepper import SchemeParams, make_initial, run

from conftest import ACCEPTANCE_LINES

MASS_TOL = 1e-12
STEPS = 10_000
# all mean values of acceptance trajectories, keyed by run label
MASSES = {}


def report(n, ok, msg):
    ACCEPTANCE_LINES.append(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {msg}")
    assert ok, msg


def fast_grid(d, N):
    return make_grid(d, N, sfft.next_fast_len(4 * N + 1, real=True))


def timed_run(label, u0, p, steps, record_every):
    t0 = time.perf_counter()
    res = run(u0, p, steps, record_every=record_every)
    MASSES[label] = res.max_abs_mass
    return res, time.perf_counter() - t0


# ----------------------------------------------------------------- fixtures

C5_CASES = {1: (256, 10), 2: (64, 10), 3: (16, 100)}  # d: (N, record_every)
C5_NU = 0.05


@pytest.fixture(scope="module")
def c5_runs():
    out = {}
    for d, (N, rec) in C5_CASES.items():
        g = fast_grid(d, N)
        u0 = make_initial("tanh-stripes", g, nu=C5_NU)
        cert = certify_field(u0, C5_NU)
        res, secs = timed_run(f"C5 d={d}", u0, SchemeParams(C5_NU, cert.tau_max, N), STEPS, rec)
        out[d] = (cert, res, secs)
    return out


C6_N = 32
C6_AMPLITUDE = 0.05


@pytest.fixture(scope="module")
def c6_runs():
    g = make_grid(2, C6_N)
    u0 = make_initial("single-mode", g, amplitude=C6_AMPLITUDE)
    out = {}
    for variant in ("2d-nu1-first", "2d-nu1-second"):
        cert = certify_field(u0, 1.0, variant)
        res, secs = timed_run(f"C6 {variant}", u0, SchemeParams(1.0, cert.tau_max, C6_N), STEPS, 10)
        out[variant] = (cert, res, secs)
    return out


C8_T = 0.1
C8_NU = 0.1
C8_TAU = 2.5e-4
C8_N = 16


def c8_data(g):
    return Field.from_function(
        g, lambda x, y: 0.8 * np.cos(2 * np.pi * x) + 0.4 * np.sin(2 * np.pi * (x + y))
    )


@pytest.fixture(scope="module")
def c8_runs():
    g = fast_grid(2, C8_N)
    u0 = c8_data(g)
    t0 = time.perf_counter()
    finals = {}
    for div in (1, 2, 4, 64):
        tau = C8_TAU / div
        steps = int(round(C8_T / tau))
        res = run(u0, SchemeParams(C8_NU, tau, C8_N), steps, record_every=steps)
        MASSES[f"C8 tau/{div}"] = res.max_abs_mass
        finals[div] = res.final
    return finals, time.perf_counter() - t0


# ----------------------------------------------------------------- criteria


def test_criterion_1_lattice_sums():
    t0 = time.perf_counter()
    head = lattice_sum(2, power_summand(4), R=math.inf, kmax=10)
    tail = math.pi * (10 - SQ2INV) ** -2
    secs = time.perf_counter() - t0
    ok = abs(head - 6.0036) <= 2e-4 and abs(tail - 0.0364) <= 2e-4 and head < 6.0036 and secs < 1
    report(1, ok, f"head={head:.8f} tail={tail:.7f} runtime={secs:.3f}s")


def test_criterion_2_m003_table():
    t0 = time.perf_counter()
    r = verify_m003()
    secs = time.perf_counter() - t0
    ok = r.margin > 0 and secs < 10
    report(2, ok, f"worst margin {r.margin:.3g} at bound {r.bound} (9 entries) runtime={secs:.2f}s")


def test_criterion_3_eta_constants():
    t0 = time.perf_counter()
    rows = eta_constants_check()
    secs = time.perf_counter() - t0
    displayed = {"2D eta^8", "2D (1-eta)^(8/3)", "1D eta^(16/3)", "1D (1-eta)^(16/9)", "3D eta^8"}
    sel = [r for r in rows if r["label"] in displayed]
    four_sig = all(float(f"{r['value']:.4g}") == float(f"{r['displayed']:.4g}") for r in sel)
    ok = len(sel) == 5 and four_sig and all(r["clears_threshold"] for r in sel) and secs < 1
    vals = ", ".join(f"{r['value']:.7g}" for r in sel)
    report(3, ok, f"values {vals}; runtime={secs:.4f}s")


@pytest.mark.slow
def test_criterion_4_kernel_scaling():
    t0 = time.perf_counter()
    reports = run_all("leKbeta")
    secs = time.perf_counter() - t0
    parts = []
    ok = secs < 60
    for r in reports:
        d = int(r.lemma_id.split("=")[1])
        for p in (1.0, 4 / 3, 2.0, math.inf):
            key = "p=inf" if math.isinf(p) else f"p={p:g}"
            info = r.details[key]
            expected = -lemma_exponent(d, p)
            good = abs(info["slope"] - expected) <= info["tol"]
            ok &= good
            if not good:
                parts.append(f"d={d} {key} slope {info['slope']:.4f} vs {expected:.4f}")
    msg = "; ".join(parts) if parts else "all 12 slopes within tolerance"
    report(4, ok, f"{msg}; runtime={secs:.1f}s")


@pytest.mark.slow
def test_criterion_5_energy_monotone(c5_runs):
    parts = []
    ok = True
    for d, (cert, res, secs) in c5_runs.items():
        good = res.monotone_ok and res.z2_ok and secs < 300
        ok &= good
        parts.append(
            f"d={d} N={C5_CASES[d][0]} tau={cert.tau_max:.4g} ({','.join(cert.binding)}) "
            f"E {res.energies[0]:.6f}->{res.energies[-1]:.6f} "
            f"monotone={res.monotone_ok} z2={res.z2_ok} {secs:.0f}s"
        )
    report(5, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_6_nu1_theorems(c6_runs):
    parts = []
    ok = True
    for variant, (cert, res, secs) in c6_runs.items():
        good = cert.L0 <= 1.25 and res.monotone_ok and secs < 300
        ok &= good
        parts.append(f"{variant} E0={cert.E0:.4f} tau={cert.tau_max:.4g} monotone={res.monotone_ok} {secs:.0f}s")
    small = [tau_max_2d_nu1_first(0.01).tau_max, tau_max_2d_nu1_second(0.01).tau_max]
    agree = small == [0.5, 0.5]
    ok &= agree
    parts.append(f"E0=0.01 both give {small}")
    report(6, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_7_mass(c5_runs, c6_runs, c8_runs):
    worst = max(MASSES.values())
    ok = len(MASSES) == 9 and worst <= MASS_TOL
    report(7, ok, f"max |mean u_n| = {worst:.2e} over {len(MASSES)} runs")


@pytest.mark.slow
def test_criterion_8_temporal_order(c8_runs):
    finals, secs = c8_runs
    ref = finals[64]
    errs = [math.sqrt(np.mean((finals[k].values - ref.values) ** 2)) for k in (1, 2, 4)]
    orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
    ok = all(abs(o - 1.0) <= 0.15 for o in orders) and secs < 120
    report(8, ok, f"tau={C8_TAU:g} errors {[f'{e:.3e}' for e in errs]} orders "
                  f"{[round(o, 3) for o in orders]} runtime={secs:.0f}s")


def test_criterion_9_projection_energy():
    r = verify_prop_Eu()
    rem = verify_prop_Eu_remark(nu=1e-5)
    errs = r.details["errors"]
    ok = r.ok and r.details["strictly decreasing"] and errs[-1] < 1e-8 and rem.computed > 10
    report(9, ok, f"errors {[f'{e:.2e}' for e in errs]}; inflation at nu=1e-5, N=2: {rem.computed:.2f}x")


def test_criterion_10_scope():
    # the scope statement holds when every invariant suite above produced a verdict
    seen = {int(line.split()[1].rstrip(":")) for line in ACCEPTANCE_LINES}
    missing = sorted(set(range(1, 10)) - seen)
    ok = not missing
    report(10, ok, "criteria 1-9 all evaluated; metastable and small-nu 3D dynamics are out of scope"
           if ok else f"no verdict for criteria {missing}")
