"""Certified energy-stable time steps for the IMEX scheme.

Every function here is a closed-form evaluation; the only numerical inputs
are the absolute constants estimated in ``constants``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .constants import load_constants

VARIANTS = ("2d-nu1-first", "2d-nu1-second", "general-1d", "general-2d", "general-3d")
L0_NU1_MAX = 1.25
H_TAU_BREAK = (4 * math.pi) ** -4
E2 = math.e**2


class PreconditionError(ValueError):
    """A theorem hypothesis does not hold for the supplied data."""


@dataclass
class StabilityCertificate:
    d: int
    nu: float
    E0: float
    L0: float | None
    variant: str
    tau_max: float
    tau_max_1: float | None
    derived: dict
    binding: list
    flags: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)

    def describe(self):
        lines = [
            f"variant      {self.variant}",
            f"dimension    {self.d}",
            f"nu           {self.nu:.6g}",
            f"E0           {self.E0:.10g}",
            f"L0           {'n/a' if self.L0 is None else f'{self.L0:.10g}'}",
        ]
        for k, v in self.derived.items():
            lines.append(f"{k:<12} {v:.10g}")
        if self.tau_max_1 is not None:
            lines.append(f"tau_max_1    {self.tau_max_1:.10g}")
        lines.append(f"tau_max      {self.tau_max:.10g}")
        lines.append(f"binding      {', '.join(self.binding)}")
        if self.flags:
            lines.append(f"flags        {', '.join(self.flags)}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return str(x)


def _binding(terms, rtol=1e-12):
    """Names of the terms attaining the minimum (several on a tie)."""
    m = min(terms.values())
    return m, [k for k, v in terms.items() if v <= m * (1 + rtol)]


def _check_E0(E0):
    if E0 < 0 or not math.isfinite(E0):
        raise ValueError(f"E0 must be finite and >= 0, got {E0}")


def _check_L0_nu1(L0, theorem):
    if L0 is not None and L0 > L0_NU1_MAX:
        raise PreconditionError(
            f"{theorem} requires |u^0|_inf <= {L0_NU1_MAX}; the data has L0 = {L0:.6g}"
        )


def f0_of_energy(E0):
    """F0 = (2 sqrt(2 E0) + 3 E0)^2."""
    _check_E0(E0)
    return (2 * math.sqrt(2 * E0) + 3 * E0) ** 2


def tau_max_2d_nu1_first(E0, L0=None):
    """2D, nu = 1, energy-based bound via F0; needs |u^0|_inf <= 1.25."""
    F0 = f0_of_energy(E0)
    _check_L0_nu1(L0, "the nu = 1 first-approach bound")
    if F0 <= 1:
        terms = {"1/2": 0.5}
    else:
        terms = {"1/2": 0.5, "1/(F0(1+ln F0))^2": 1.0 / (F0 * (1 + math.log(F0))) ** 2}
    tau, binding = _binding(terms)
    return StabilityCertificate(2, 1.0, E0, L0, "2d-nu1-first", tau, None, {"F0": F0}, binding)


def nu1_second_B(E0):
    """(B1, B2) of the second nu = 1 bound."""
    _check_E0(E0)
    s = math.sqrt(2 * E0)
    return (3.1 / 99.8) * (s + 0.19676 * E0) ** 4, (0.8988 * s + 0.18692 * E0) ** 4


def tau_max_2d_nu1_second(E0, L0=None):
    """2D, nu = 1, bound via the lattice estimate h(tau).

    The 1/(B1 (ln B1)^2) term only arises when B1 >= e^2 (large energy);
    below that it is omitted and the certificate is flagged.
    """
    B1, B2 = nu1_second_B(E0)
    _check_L0_nu1(L0, "the nu = 1 second-approach bound")
    terms = {"1/2": 0.5, "(8/9)/B2": (8.0 / 9.0) / B2 if B2 > 0 else math.inf}
    flags = []
    if B1 >= E2:
        terms["1/(B1 (ln B1)^2)"] = 1.0 / (B1 * math.log(B1) ** 2)
    else:
        flags.append("B1<e^2: log term omitted")
    tau, binding = _binding(terms)
    return StabilityCertificate(
        2, 1.0, E0, L0, "2d-nu1-second", tau, None, {"B1": B1, "B2": B2}, binding, flags
    )


def h_tau(tau):
    """Upper bound for the l^2 sum of (1 - 2 tau s^2)/(1 + tau s^4) / s, s = 2 pi |k|, on Z^2."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if tau <= H_TAU_BREAK:
        return math.sqrt(-math.log(tau) / (8 * math.pi) + 0.52) + 0.00872
    return 0.8988


def _neg_pow(x, e):
    """x^-e with 0^-e = inf."""
    return math.inf if x == 0 else x ** (-e)


def tau_max_general(d, nu, L0, E0, consts=None):
    """min{8 nu / (9 L0^4), tau_max_1} for d = 1, 2, 3."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    if not L0 > 0:
        raise ValueError("L0 must be positive")
    _check_E0(E0)
    if consts is None:
        consts = load_constants()
    g = math.sqrt(1 + 2 * math.sqrt(E0))
    try:
        if d == 2:
            a1 = consts["C1"] * g
            a2 = 2 * consts["C2"] * math.sqrt(E0) * g
            derived = {"C1": consts["C1"], "C2": consts["C2"], "alpha1": a1, "alpha2": a2}
            branches = {"alpha1": 0.04 * nu**3 * _neg_pow(a1, 8), "alpha2": 0.04 * nu**3 * _neg_pow(a2, 8 / 3)}
        elif d == 1:
            b1 = consts["B1"] * g
            b2 = 2 * consts["B2"] * math.sqrt(E0) * g
            derived = {"B1": consts["B1"], "B2": consts["B2"], "beta1": b1, "beta2": b2}
            c = 0.118 * nu ** (5 / 3)
            branches = {"beta1": c * _neg_pow(b1, 16 / 3), "beta2": c * _neg_pow(b2, 16 / 9)}
        elif d == 3:
            b3 = consts["B3p"] * math.sqrt(E0)
            b4 = consts["B4p"] * E0**1.5
            b5 = consts["B5p"] * (1 + E0) ** 0.25
            derived = {"B3p": consts["B3p"], "B4p": consts["B4p"], "B5p": consts["B5p"],
                       "beta3": b3, "beta4": b4, "beta5": b5}
            c = 0.0007 * nu**7
            branches = {"beta3": c * _neg_pow(b3, 8), "beta4": c * _neg_pow(b4, 8 / 3),
                        "beta5": c * _neg_pow(b5, 8)}
        else:
            raise ValueError("d must be 1, 2 or 3")
    except KeyError as exc:
        raise KeyError(f"constant {exc} missing for d={d}; run `chimex constants --dim {d}`") from None
    tau1 = min(branches.values())
    terms = {"8nu/(9L0^4)": 8 * nu / (9 * L0**4), **branches}
    tau, binding = _binding(terms)
    derived = {**derived, **{f"tau[{k}]": v for k, v in terms.items()}}
    return StabilityCertificate(d, nu, E0, L0, f"general-{d}d", tau, tau1, derived, binding)


def certify(variant, E0, L0=None, nu=1.0, d=None, consts=None):
    """Dispatch on the variant name."""
    if variant == "2d-nu1-first":
        return tau_max_2d_nu1_first(E0, L0)
    if variant == "2d-nu1-second":
        return tau_max_2d_nu1_second(E0, L0)
    if variant.startswith("general-"):
        dd = int(variant[len("general-")])
        if d is not None and d != dd:
            raise ValueError(f"variant {variant} does not match d={d}")
        if L0 is None:
            raise ValueError("general certificates need L0")
        return tau_max_general(dd, nu, L0, E0, consts)
    raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")


def certify_field(u, nu, variant=None, consts=None, oversample=4):
    """Certificate from actual initial data: E0 = E(u), L0 = oversampled sup |u|."""
    from .energy import energy
    from .grid import sup_norm

    d = u.grid.d
    variant = variant or f"general-{d}d"
    if variant.startswith("2d-nu1") and (d != 2 or nu != 1.0):
        raise PreconditionError(f"{variant} needs d = 2 and nu = 1 (got d = {d}, nu = {nu})")
    cert = certify(variant, energy(u, nu), sup_norm(u, oversample), nu=nu, d=d, consts=consts)
    cert.provenance.update({"N": u.grid.N, "M": u.grid.M, "L0_oversample": oversample})
    return cert


ETA_2D = 0.690119
ETA_3D = 0.778006

# (label, computed value, value displayed in the derivation, threshold)
def eta_constants_check():
    """Recompute the displayed eta-powers and check each exceeds its threshold."""
    c34 = 2**0.75 * 3**-0.5
    c14 = 2**0.25 * 3**-0.5
    rows = [
        ("2D eta^8", (ETA_2D * c34) ** 8, 0.0406525, 0.04),
        ("2D (1-eta)^(8/3)", ((1 - ETA_2D) * c34) ** (8 / 3), 0.0406523, 0.04),
        ("1D eta^(16/3)", (ETA_2D * c34) ** (16 / 3), 0.118229, 0.118),
        ("1D (1-eta)^(16/9)", ((1 - ETA_2D) * c34) ** (16 / 9), 0.118229, 0.118),
        ("3D eta^8", (ETA_3D * c14) ** 8, 0.0066288, 0.006),
        ("3D (1-eta)^(8/3)", ((1 - ETA_3D) * c14) ** (8 / 3), 0.0066288, 0.006),
        ("3D 6^-4", 6.0**-4, 0.000771605, 0.0007),
    ]
    out = []
    for label, val, shown, thr in rows:
        out.append({
            "label": label,
            "value": val,
            "displayed": shown,
            "threshold": thr,
            "rel_diff": abs(val - shown) / shown,
            "clears_threshold": val > thr,
        })
    return out


def lm43a_check(A_values, fractions=(1.0, 0.5, 0.1, 1e-3)):
    """For B = 3.1 A and x <= 1/(B (ln B)^2): x (ln x)^2 <= 1/A.

    Returns the smallest margin 1/A - h(x) over the supplied A and fractions
    of the admissible x.
    """
    worst = math.inf
    for A in A_values:
        B = 3.1 * A
        x_max = 1.0 / (B * math.log(B) ** 2)
        for f in fractions:
            x = f * x_max
            worst = min(worst, 1.0 / A - x * math.log(x) ** 2)
    return worst
