import math

import numpy as np
import pytest

from chimex.energy import energy
from chimex.grid import Field, make_grid, project_N, read_field, write_field
from chimex.stepper import (
    INITIAL_KINDS,
    DivergenceError,
    InitialData,
    Propagator,
    SchemeParams,
    double_well_f,
    make_initial,
    run,
    step,
)


class TestSchemeParams:
    @pytest.mark.parametrize("nu,tau,N", [(0.0, 1.0, 4), (1.0, -1.0, 4), (1.0, 1.0, 1)])
    def test_invalid(self, nu, tau, N):
        with pytest.raises(ValueError):
            SchemeParams(nu, tau, N)


class TestInitialData:
    @pytest.mark.parametrize("kind", ["zero", "single-mode", "random-bandlimited", "tanh-stripes"])
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_mean_zero_and_band_limited(self, kind, d):
        g = make_grid(d, 4)
        u = make_initial(kind, g)
        assert abs(u.hat.flat[0]) < 1e-15
        assert np.all(u.hat[~g.mask()] == 0)

    def test_random_is_seeded(self):
        g = make_grid(2, 8)
        a = make_initial("random-bandlimited", g, seed=5)
        b = make_initial("random-bandlimited", g, seed=5)
        c = make_initial("random-bandlimited", g, seed=6)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.allclose(a.values, c.values)

    def test_from_file(self, tmp_path):
        g = make_grid(1, 8)
        u = make_initial("single-mode", g, amplitude=0.3)
        write_field(tmp_path / "u.chk", u)
        v = InitialData("from-file", path=str(tmp_path / "u.chk")).build(g)
        np.testing.assert_allclose(v.values, u.values, atol=1e-15)

    def test_from_file_grid_mismatch(self, tmp_path):
        write_field(tmp_path / "u.chk", make_initial("single-mode", make_grid(1, 8)))
        with pytest.raises(ValueError, match="does not match"):
            make_initial("from-file", make_grid(1, 4), path=tmp_path / "u.chk")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_initial("gaussian", make_grid(1, 4))

    def test_kinds_listed(self):
        assert "from-file" in INITIAL_KINDS


class TestStep:
    def test_zero_is_fixed_point(self, backend):
        g = make_grid(2, 8)
        u = step(Field.zeros(g), SchemeParams(0.1, 0.1, 8))
        assert np.all(u.values == 0)

    def test_rejects_nonzero_mean(self):
        g = make_grid(1, 4)
        u = Field.from_function(g, lambda x: 0.1 + 0 * x)
        with pytest.raises(ValueError, match="mean"):
            step(u, SchemeParams(0.1, 0.1, 4))

    def test_linear_decay_rate(self):
        # without f each mode is multiplied by 1 / (1 + nu tau s^4)
        g = make_grid(1, 8)
        u = make_initial("single-mode", g)
        nu, tau = 0.01, 0.1
        v = step(u, SchemeParams(nu, tau, 8), nonlinear=False)
        s4 = (2 * math.pi) ** 4
        np.testing.assert_allclose(v.values, u.values / (1 + nu * tau * s4), atol=1e-14)

    def test_matches_implicit_equation(self, backend):
        # (1 + nu tau Delta^2) u1 = u0 + tau Delta Pi_N f(u0)
        g = make_grid(2, 8)
        u0 = make_initial("random-bandlimited", g, seed=1)
        p = SchemeParams(0.05, 0.01, 8)
        u1 = step(u0, p)
        lap = g.lap_symbol
        lhs = (1 + p.nu * p.tau * lap**2) * u1.hat
        rhs = u0.hat - p.tau * lap * project_N(double_well_f(u0)).hat
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_scheme_cutoff_below_grid(self):
        g = make_grid(1, 8)
        u = make_initial("random-bandlimited", g, seed=2)
        v = step(u, SchemeParams(0.1, 0.01, 4))
        assert np.all(v.hat[~g.mask(4)] == 0)

    def test_cutoff_above_grid(self):
        with pytest.raises(ValueError):
            Propagator(make_grid(1, 4), SchemeParams(0.1, 0.1, 8))


class TestRun:
    def test_zero_data(self, backend):
        res = run(Field.zeros(make_grid(2, 8)), SchemeParams(0.05, 0.01, 8), 100)
        np.testing.assert_array_equal(res.energies, 0.25)
        assert res.monotone_ok and res.z2_ok

    def test_monotone_small_tau(self, backend):
        g = make_grid(2, 16)
        u0 = make_initial("tanh-stripes", g, nu=0.01)
        res = run(u0, SchemeParams(0.01, 1e-4, 16), 200, record_every=20)
        assert res.monotone_ok
        assert res.z2_ok
        assert res.max_abs_mass < 1e-14
        assert len(res.records) == 11
        assert res.summary()["steps"] == 200

    def test_energies_match_recomputation(self):
        g = make_grid(1, 16)
        u0 = make_initial("tanh-stripes", g, nu=0.01)
        p = SchemeParams(0.01, 1e-3, 16)
        res = run(u0, p, 5)
        u = u0
        for n in range(5):
            u = step(u, p)
        assert res.energies[-1] == pytest.approx(energy(u, 0.01), rel=1e-12)
        np.testing.assert_allclose(res.final.values, u.values, atol=1e-13)

    def test_divergence_reported(self):
        g = make_grid(1, 32)
        u0 = make_initial("tanh-stripes", g, nu=0.01)
        with pytest.raises(DivergenceError) as exc:
            run(u0, SchemeParams(0.001, 10.0, 32), 200)
        assert exc.value.step >= 1

    def test_large_tau_violation_or_monotone(self):
        # an oversized step may break monotonicity; it must be reported, never silent
        g = make_grid(1, 32)
        u0 = make_initial("tanh-stripes", g, nu=0.01, amplitude=1.2)
        try:
            res = run(u0, SchemeParams(0.01, 0.05, 32), 50)
        except DivergenceError:
            return
        assert np.all(np.isfinite(res.energies))
        if not res.monotone_ok:
            first = res.first_monotone_violation
            assert res.energies[first] > res.energies[first - 1]

    def test_csv_and_checkpoints(self, tmp_path):
        g = make_grid(1, 8)
        u0 = make_initial("single-mode", g, amplitude=0.5)
        res = run(u0, SchemeParams(0.1, 0.01, 8), 10, record_every=5, csv_path=tmp_path / "e.csv",
                  checkpoint_every=5, checkpoint_dir=tmp_path / "chk")
        lines = (tmp_path / "e.csv").read_text().splitlines()
        assert lines[0] == "step,time,energy,mass,linf_norm,h1_norm,lemma_z2_ok"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["0", "5", "10"]
        assert len(res.checkpoints) == 2
        np.testing.assert_allclose(read_field(res.checkpoints[-1]).values, res.final.values)

    def test_deterministic_csv(self, tmp_path):
        g = make_grid(2, 8)
        u0 = make_initial("random-bandlimited", g, seed=4)
        for name in ("a.csv", "b.csv"):
            run(u0, SchemeParams(0.05, 1e-3, 8), 20, csv_path=tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_initial_data_needs_grid(self):
        with pytest.raises(ValueError):
            run(InitialData(), SchemeParams(0.1, 0.1, 4), 1)

    def test_bad_counts(self):
        u0 = Field.zeros(make_grid(1, 4))
        with pytest.raises(ValueError):
            run(u0, SchemeParams(0.1, 0.1, 4), 0)
        with pytest.raises(ValueError):
            run(u0, SchemeParams(0.1, 0.1, 4), 1, record_every=0)

    def test_backends_agree(self, monkeypatch):
        from chimex import _backend, energy as energy_mod, stepper

        g = make_grid(2, 8)
        u0 = make_initial("random-bandlimited", g, seed=9)
        out = []
        for name in sorted(_backend.AVAILABLE):
            monkeypatch.setattr(stepper, "kernels", _backend.get(name))
            monkeypatch.setattr(energy_mod, "kernels", _backend.get(name))
            out.append(run(u0, SchemeParams(0.05, 1e-3, 8), 50).energies)
        for e in out[1:]:
            np.testing.assert_allclose(e, out[0], rtol=1e-13)
