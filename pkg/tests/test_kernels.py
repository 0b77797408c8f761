import math

import numpy as np
import pytest

from chimex.kernels import (
    free_kernel,
    free_space_norm,
    image_count,
    kernel_norm,
    kernel_norms,
    lemma_exponent,
    multiplier,
    norm_grid,
    periodic_kernel,
    physical_method,
)


class TestFreeKernel:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_unit_mass(self, d):
        # the free kernel is the inverse transform of 1/(1 + (2 pi |xi|)^4), so it integrates to 1
        from scipy import integrate

        K1 = free_kernel(d)
        area = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[d]
        total = sum(
            integrate.quad(lambda r: float(K1(r)) * r ** (d - 1), a, b, limit=200)[0]
            for a, b in [(1e-9, 1.0), (1.0, 10.0), (10.0, 60.0)]
        )
        assert area * total == pytest.approx(1.0, abs=1e-6)

    def test_norms(self):
        assert free_space_norm(1, 4 / 3) == pytest.approx(0.74036, abs=1e-5)
        assert free_space_norm(2, 4 / 3) == pytest.approx(0.52299, abs=1e-5)

    def test_exponents(self):
        assert lemma_exponent(2, math.inf) == 0.5
        assert lemma_exponent(2, 1.0) == 0.0
        assert lemma_exponent(3, 2.0) == pytest.approx(0.375)


class TestPeriodicKernel:
    def test_value_at_origin_matches_sum(self):
        beta = 1e-3
        k = np.arange(1, 20001, dtype=float)
        direct = 2 * np.sum(multiplier(k**2, beta))
        assert float(periodic_kernel(np.zeros((1, 1)), beta)[0]) == pytest.approx(direct, rel=1e-8)

    def test_mean_zero(self):
        x = (np.arange(4096) / 4096 - 0.5)[:, None]
        assert abs(np.mean(periodic_kernel(x, 1e-4))) < 1e-10

    def test_image_count_grows_with_beta(self):
        assert image_count(1e-8, 2) <= image_count(1e-2, 2)


class TestRoutes:
    def test_rays_and_grid_agree_1d(self):
        a = kernel_norm(1e-4, 1, 4 / 3, method="rays")
        b = kernel_norm(1e-4, 1, 4 / 3, method="grid")
        assert a.value == pytest.approx(b.value, rel=1e-7)

    def test_grid_and_lattice_agree_2d(self):
        lat = kernel_norm(1e-4, 2, 2, method="lattice").value
        grid = float(norm_grid(1e-4, 2, [2.0], 512)[0]) ** 0.5
        assert grid == pytest.approx(lat, rel=1e-6)

    def test_sup_is_value_at_origin(self):
        v = kernel_norm(1e-3, 1, math.inf, method="lattice").value
        assert v == pytest.approx(float(periodic_kernel(np.zeros((1, 1)), 1e-3)[0]), rel=1e-6)

    def test_auto_dispatch(self):
        out = kernel_norms(1e-4, 1, [4 / 3, 2, math.inf])
        assert [n.method for n in out][1:] == ["lattice", "lattice"]
        assert all(n.drift < 1e-5 for n in out)
        assert physical_method(1e-8, 2) == "rays"
        assert physical_method(1e-2, 2) == "grid"

    @pytest.mark.parametrize("beta", [1e-12, 1e-8])
    def test_scaled_within_mean_shift_of_free_space(self, beta):
        # K~ = periodised K - 1, and the constant 1 has unit L^p norm on the cell
        n = kernel_norm(beta, 1, 4 / 3)
        shift = beta ** lemma_exponent(1, 4 / 3)
        assert abs(n.scaled - free_space_norm(1, 4 / 3)) <= shift * 1.001

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            kernel_norm(1e-4, 1, 4 / 3, method="magic")

    def test_holder_ordering(self):
        ps = [1.0, 4 / 3, 2.0, math.inf]
        vals = [n.value for n in kernel_norms(1e-3, 1, ps)]
        assert vals == sorted(vals)


class TestLargeBeta:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_l1_decays_like_inverse_beta(self, d):
        scaled = [b * kernel_norm(b, d, 1.0).value for b in (1.0, 10.0, 100.0)]
        assert max(scaled) / min(scaled) < 1.01

    def test_limit_profile_1d(self):
        # beta |K~|_1 -> |sum_{k != 0} (2 pi k)^-4 e^{2 pi i k x}|_1 as beta -> oo
        x = np.arange(4096) / 4096
        k = np.arange(1, 2000)[:, None]
        prof = 2 * np.sum(np.cos(2 * np.pi * k * x) / (2 * np.pi * k) ** 4, axis=0)
        assert 100.0 * kernel_norm(100.0, 1, 1.0).value == pytest.approx(np.mean(np.abs(prof)), rel=1e-3)
