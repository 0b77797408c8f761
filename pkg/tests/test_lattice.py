import math

import pytest

from chimex.lattice import (
    LatticeSum,
    Summand,
    adaptive_sum,
    is_decreasing_beyond,
    lattice_sum,
    power_summand,
    sum_with_tail,
    tail_bracket,
)

# sum_{k in Z^2, k != 0} |k|^-4 = 4 zeta(2) beta(2)
EPSTEIN_Z2_4 = 4 * (math.pi**2 / 6) * 0.915965594177219


class TestSummand:
    def test_power(self):
        g = power_summand(3.0)
        assert float(g(2.0)) == pytest.approx(1 / 8)

    def test_general(self):
        g = Summand(A=1.0, B=-0.5, q=2.0, a=-2.0, beta=0.1, b=1.0)
        r = 0.3
        s2 = (2 * math.pi * r) ** 2
        expect = (1 - 0.5 * s2) ** 2 / s2 / (1 + 0.1 * s2**2)
        assert float(g(r)) == pytest.approx(expect)

    def test_zero_factor(self):
        g = Summand(A=1.0, B=-1.0, q=1.0)
        assert float(g(1 / (2 * math.pi))) == 0.0


class TestFiniteSums:
    def test_m011_head(self, backend):
        assert lattice_sum(2, power_summand(4), R=math.inf, kmax=10, backend=backend) == pytest.approx(
            6.00355356, abs=1e-8
        )

    def test_rings(self, backend):
        g = power_summand(0)
        assert lattice_sum(2, g, R=1.0, backend=backend) == 4
        assert lattice_sum(2, g, R=math.sqrt(2), backend=backend) == 8
        assert lattice_sum(3, g, R=1.0, backend=backend) == 6
        assert lattice_sum(2, g, R=2.0, rmin=1.5, backend=backend) == 4

    def test_needs_bound(self):
        with pytest.raises(ValueError):
            lattice_sum(2, power_summand(4))


class TestTail:
    def test_bracket_contains_truth(self, backend):
        res = sum_with_tail(2, power_summand(4), 32.0, backend=backend)
        assert res.lower <= EPSTEIN_Z2_4 <= res.upper
        assert res.rel_width < 1e-3

    def test_adaptive_converges(self, backend):
        res, ok = adaptive_sum(2, power_summand(4), rtol=1e-7, backend=backend)
        assert ok
        assert res.lower <= EPSTEIN_Z2_4 <= res.upper
        assert res.value == pytest.approx(EPSTEIN_Z2_4, rel=1e-7)

    def test_one_dimensional_zeta(self):
        # sum over Z \ {0} of |k|^-2 = pi^2 / 3
        res, ok = adaptive_sum(1, power_summand(2), rtol=1e-8)
        assert ok
        assert res.lower <= math.pi**2 / 3 <= res.upper

    def test_tail_ratio_small(self):
        res, _ = adaptive_sum(3, Summand(a=-2.0, beta=1e-4, b=2.0), rtol=1e-6)
        assert res.tail_hi / res.upper < 1e-2

    def test_small_R_rejected(self):
        with pytest.raises(ValueError):
            tail_bracket(3, power_summand(4), 1.0)

    def test_non_monotone_rejected(self):
        # |1 - 2 tau s^2| vanishes at r = 1 / (2 pi sqrt(2 tau)) ~ 35.6 for tau = 1e-5
        g = Summand(A=1.0, B=-2e-5, q=2.0, a=-2.0, beta=1e-5, b=2.0)
        assert not is_decreasing_beyond(g, 20.0)
        with pytest.raises(ValueError):
            tail_bracket(2, g, 20.0)

    def test_cap_reports_not_converged(self):
        res, ok = adaptive_sum(2, power_summand(2.2), rtol=1e-9, R_cap=64)
        assert not ok
        assert res.R == 64

    def test_properties(self):
        s = LatticeSum(1.0, 0.1, 0.3, 10.0)
        assert s.value == pytest.approx(1.2)
        assert s.rel_width == pytest.approx(0.2 / 1.1)
        assert s.tail_ratio == pytest.approx(0.3)

    def test_deterministic(self):
        a, _ = adaptive_sum(2, Summand(a=8 / 3, beta=1e-3, b=4 / 3))
        b, _ = adaptive_sum(2, Summand(a=8 / 3, beta=1e-3, b=4 / 3))
        assert a == b
