import json
import math

import numpy as np
import pytest

from chimex.constants import (
    BETA_HI,
    BETA_LO,
    SOBOLEV_R3,
    SPECS,
    continuum_limit,
    derived_3d,
    estimate_constant,
    load_constants,
    load_raw,
    save_constants,
    scaled_quantity,
    sobolev_s6,
)


class TestShippedFile:
    def test_all_constants_present(self):
        c = load_constants()
        for name in ("B1", "B2", "C1", "C2", "B3", "B4", "B3p", "B4p", "B5p", "S6"):
            assert c[name] > 0

    def test_grid_spans_required_range(self):
        raw = load_raw()
        for name in SPECS:
            assert raw[name]["beta_lo"] <= 1e-12
            assert raw[name]["beta_hi"] >= 1e2
            assert BETA_LO <= raw[name]["argmax_beta"] <= BETA_HI

    def test_value_dominates_grid_and_limit(self):
        raw = load_raw()
        for name in SPECS:
            r = raw[name]
            assert r["value"] >= r["grid_max"]
            assert r["value"] >= r["continuum_limit"]

    def test_s6_at_least_sharp_r3(self):
        raw = load_raw()
        assert raw["S6"]["value"] >= SOBOLEV_R3
        assert raw["S6"]["numeric_ascent"] <= raw["S6"]["value"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_constants(tmp_path / "nope.json")


class TestDerived:
    def test_formulas(self):
        d = derived_3d({"B3": 1.0, "B4": 1.0}, s6=1.0)
        assert d["B3p"] == pytest.approx(math.sqrt(2))
        assert d["B4p"] == pytest.approx(2**1.5)
        assert d["B5p"] == pytest.approx(5**0.25)

    def test_sharp_constant(self):
        # Aubin-Talenti constant for |u|_6 <= S |grad u|_2 on R^3
        assert SOBOLEV_R3 == pytest.approx(0.4272605, abs=1e-6)

    def test_s6_ascent_is_a_lower_bound(self):
        s = sobolev_s6(K=3, iters=20, widths=(0.08,))
        assert 0 < s <= load_raw()["S6"]["value"]


class TestScaledQuantity:
    def test_b2_direct_sum(self):
        spec = SPECS["B2"]
        beta = 1e-3
        k = np.arange(1, 200001, dtype=float)
        s = (2 * np.pi * k) ** 2
        g = s ** (8 / 6) / (1 + beta * s**2) ** (4 / 3)
        S = 2 * np.sum(g)
        expect = beta ** (3 / 16) * (beta ** (2 / 3) * S) ** (3 / 4)
        central, upper = scaled_quantity(spec, beta)
        assert central == pytest.approx(expect, rel=1e-5)
        assert upper >= central

    def test_b3_is_scale_invariant_limit(self):
        # B3's quantity is maximised as beta -> 0, where it meets the continuum value
        lim = continuum_limit(SPECS["B3"])
        assert scaled_quantity(SPECS["B3"], 1e-12)[0] <= lim * (1 + 1e-3)

    def test_plateau_2d(self):
        vals = [scaled_quantity(SPECS["C1"], b)[0] for b in (1e-8, 1e-6, 1e-4)]
        assert max(vals) / min(vals) < 1.2


class TestEstimate:
    def test_small_range_estimate(self, tmp_path):
        est = estimate_constant("B2", beta_lo=1e-6, beta_hi=1e-2, ppd=1)
        assert est.grid_points >= 5
        assert est.value >= est.grid_max
        assert est.max_rel_uncertainty < 1e-5
        path = tmp_path / "c.json"
        save_constants({"B2": est}, path)
        assert json.loads(path.read_text())["B2"]["value"] == est.value
        assert load_constants(path)["B2"] == est.value

    def test_deterministic(self):
        a = estimate_constant("B2", beta_lo=1e-4, beta_hi=1e-2, ppd=1)
        b = estimate_constant("B2", beta_lo=1e-4, beta_hi=1e-2, ppd=1)
        assert a == b
