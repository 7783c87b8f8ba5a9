import numpy as np
import pytest

from memopt import dataset as ds
from memopt import fixtures
from memopt.exceptions import SamplingExhausted, SpecError
from memopt.paramspace import Parametrization, validate


class TestSampling:
    def test_count_and_validity(self, alpha_spec):
        params = ds.sample_parametrizations(alpha_spec, 500, 1)
        assert len(params) == 500
        assert all(validate(alpha_spec, p)[0] for p in params)

    def test_deterministic(self, alpha_spec):
        a = ds.sample_parametrizations(alpha_spec, 50, 9)
        b = ds.sample_parametrizations(alpha_spec, 50, 9)
        assert [p.values for p in a] == [p.values for p in b]

    def test_exclusion_respected(self, alpha_spec):
        lo, hi = 10_000, 200_000
        params = ds.sample_parametrizations(alpha_spec, 200, 2, [(lo, hi)])
        assert all(not (lo <= p.size_bits <= hi) for p in params)

    def test_full_exclusion_exhausts(self, tiny_spec):
        with pytest.raises(SamplingExhausted):
            ds.sample_parametrizations(tiny_spec, 5, 3, [(0, 10**9)])

    def test_uniform_marginals(self, alpha_spec):
        params = ds.sample_parametrizations(alpha_spec, 10_000, 4)
        from scipy import stats
        for name in ("periphery_vt", "column_mux", "redundancy"):
            choices = alpha_spec.param_def(name).choices
            counts = np.array([
                sum(1 for p in params if p.values[name] == c) for c in choices
            ])
            freqs = counts / len(params)
            assert np.all(np.abs(freqs - 1 / 3) <= 0.03), (name, freqs)
            chi2 = stats.chisquare(counts).pvalue
            assert chi2 > 0.01, (name, chi2)


class TestEncode:
    def test_ordinal_and_size(self, alpha_spec):
        p = Parametrization("alpha", "1.0", {
            "word_depth": 32, "word_width": 8, "dual_rail": 0, "banks": 1,
            "column_mux": 4, "periphery_vt": "low", "redundancy": "none",
        })
        x = ds.encode(alpha_spec, p)
        names = ds.feature_names(alpha_spec)
        assert names[-1] == "size"
        assert x[names.index("periphery_vt")] == 0
        assert x[names.index("word_depth")] == 32
        assert x[-1] == 256
        p2 = Parametrization("alpha", "1.0", dict(p.values, periphery_vt="high"))
        assert ds.encode(alpha_spec, p2)[names.index("periphery_vt")] == 2

    def test_length_matches_params_plus_one(self, alpha_spec):
        p = ds.sample_parametrizations(alpha_spec, 1, 1)[0]
        x = ds.encode(alpha_spec, p)
        assert len(x) == len(alpha_spec.param_names) + 1

    def test_injective_on_tiny(self, tiny_spec):
        from test_synthcompiler import all_legal
        points = all_legal(tiny_spec)
        encoded = {tuple(ds.encode(tiny_spec, p)) for p in points}
        assert len(encoded) == len(points)


class TestScalers:
    def make_obs(self, X, Y, spec):
        p = ds.sample_parametrizations(spec, 1, 1)[0]
        return [ds.Observation(np.asarray(x, float), np.asarray(y, float), p)
                for x, y in zip(X, Y)]

    def test_constant_target_degenerate(self, tiny_spec):
        obs = self.make_obs(
            [[0.0, 1], [1.0, 2], [2.0, 3]],
            [[4.0], [4.0], [4.0]],
            tiny_spec,
        )
        scalers = ds.fit_scalers(obs)
        assert scalers.y_degenerate[0]
        scaled = ds.transform_y(scalers, np.array([[4.0]]))
        assert scaled[0, 0] == 0.0
        back, clamped = ds.inverse_transform_y(scalers, scaled)
        assert back[0, 0] == pytest.approx(4.0, rel=1e-12)
        assert not clamped.any()

    def test_train_range_attained(self, quality_model):
        parts = quality_model["parts"]
        scalers = ds.fit_scalers(parts.train)
        Y = np.stack([o.y for o in parts.train])
        scaled = ds.transform_y(scalers, Y)
        assert scaled.min() == pytest.approx(-1.0, abs=1e-12)
        assert scaled.max() == pytest.approx(1.0, abs=1e-12)
        X = np.stack([o.x for o in parts.train])
        xs = ds.transform_x(scalers, X)
        assert xs.min() >= -1.0 - 1e-12 and xs.max() <= 1.0 + 1e-12

    def test_test_values_can_leave_range(self, tiny_spec):
        obs = self.make_obs([[0.0], [1.0]], [[1.0], [4.0]], tiny_spec)
        scalers = ds.fit_scalers(obs)
        outside = ds.transform_y(scalers, np.array([[9.0]]))
        assert outside[0, 0] > 1.0  # no clipping

    def test_round_trip_identity(self, quality_model):
        parts = quality_model["parts"]
        scalers = ds.fit_scalers(parts.train)
        Y = np.stack([o.y for o in parts.train])
        back, clamped = ds.inverse_transform_y(scalers, ds.transform_y(scalers, Y))
        rel = np.abs(back - Y) / np.maximum(np.abs(Y), 1e-300)
        assert rel.max() < 1e-9
        assert not clamped.any()

    def test_zero_boundary_exact(self, tiny_spec):
        obs = self.make_obs([[0.0], [1.0], [2.0]], [[0.0], [1.0], [4.0]], tiny_spec)
        scalers = ds.fit_scalers(obs)
        back, _ = ds.inverse_transform_y(
            scalers, ds.transform_y(scalers, np.array([[0.0]]))
        )
        assert back[0, 0] == 0.0

    def test_negative_presquare_clamps_with_flag(self, tiny_spec):
        obs = self.make_obs([[0.0], [1.0]], [[1.0], [4.0]], tiny_spec)
        scalers = ds.fit_scalers(obs)
        back, clamped = ds.inverse_transform_y(scalers, np.array([[-5.0]]))
        assert back[0, 0] == 0.0
        assert clamped[0, 0]

    def test_no_leakage_refit_reproduces(self, quality_model):
        parts = quality_model["parts"]
        a = ds.fit_scalers(parts.train)
        b = ds.fit_scalers(list(parts.train))
        for field in ("x_mean", "x_std", "x_min", "x_max", "y_mean", "y_std", "y_min", "y_max"):
            assert np.array_equal(getattr(a, field), getattr(b, field))

    def test_negative_targets_rejected(self, tiny_spec):
        obs = self.make_obs([[0.0]], [[-1.0]], tiny_spec)
        with pytest.raises(SpecError):
            ds.fit_scalers(obs)


class TestSplit:
    def test_4500_counts(self, tiny_spec):
        obs = [ds.Observation(np.zeros(1), np.zeros(1), None) for _ in range(4500)]
        parts = ds.split(obs, 1)
        assert (len(parts.train), len(parts.test), len(parts.validation)) == (3000, 1000, 500)

    def test_three_observation_edge(self):
        obs = [ds.Observation(np.zeros(1), np.zeros(1), None) for _ in range(3)]
        parts = ds.split(obs, 1)
        assert (len(parts.train), len(parts.test), len(parts.validation)) == (2, 1, 0)

    def test_same_seed_identical(self, tiny_spec):
        obs = [ds.Observation(np.array([i]), np.array([i]), None) for i in range(100)]
        a = ds.split(obs, 7)
        b = ds.split(obs, 7)
        assert [o.x[0] for o in a.train] == [o.x[0] for o in b.train]
        assert [o.x[0] for o in a.test] == [o.x[0] for o in b.test]

    def test_disjoint_union(self):
        obs = [ds.Observation(np.array([i]), np.array([i]), None) for i in range(101)]
        parts = ds.split(obs, 3)
        ids = [int(o.x[0]) for o in parts.train + parts.validation + parts.test]
        assert sorted(ids) == list(range(101))


class TestTabular:
    def test_round_trip(self, tiny_spec, tiny_coeffs, tmp_path):
        params = ds.sample_parametrizations(tiny_spec, 40, 8)
        obs = ds.build_observations(tiny_spec, tiny_coeffs, params, n_workers=1)
        path = tmp_path / "data.csv"
        ds.save_dataset(tiny_spec, obs, path)
        back = ds.load_dataset(tiny_spec, path)
        assert len(back) == len(obs)
        for a, b in zip(obs, back):
            assert np.array_equal(a.x, b.x)
            assert np.allclose(a.y, b.y, rtol=0, atol=0)
            assert a.provenance.values == b.provenance.values

    def test_header_is_corner_qualified(self, tiny_spec):
        header = ds.dataset_header(tiny_spec)
        assert "leakage@typ" in header
        assert header[: len(tiny_spec.param_names)] == list(tiny_spec.param_names)

    def test_header_mismatch_rejected(self, tiny_spec, alpha_spec, tiny_coeffs, tmp_path):
        params = ds.sample_parametrizations(tiny_spec, 3, 8)
        obs = ds.build_observations(tiny_spec, tiny_coeffs, params, n_workers=1)
        path = tmp_path / "data.csv"
        ds.save_dataset(tiny_spec, obs, path)
        with pytest.raises(SpecError):
            ds.load_dataset(alpha_spec, path)
