import numpy as np
import pytest

from memopt import dataset as ds
from memopt import fixtures
from memopt import modelzoo as mz
from memopt.exceptions import EmptySearchSpace, MissingModel, SpecError
from memopt.optimizer import (
    DimensionScalers,
    OptimizationRequest,
    RANKING_DIMENSIONS,
    dimension_scalers_from_zoo,
    optimize,
    verify_selection,
    weighted_rank_value,
)
from memopt.paramspace import Parametrization
from memopt.synthcompiler import PpaRecord


def request(depth=1024, width=32, freq=None, weights=(1.0, 1.0, 1.0), **kw):
    return OptimizationRequest(
        port_config="1rw",
        fixed={"word_depth": depth, "word_width": width, "dual_rail": 0},
        corner_selection={
            "dynamic_power": "typ", "leakage": "typ",
            "access_time": "typ", "cycle_time": "typ",
        },
        frequency_target_mhz=freq,
        weights=weights,
        **kw,
    )


class TestRequestValidation:
    def test_depth_required(self):
        with pytest.raises(SpecError):
            OptimizationRequest("1rw", {"word_width": 32}, {})

    def test_weights_not_all_zero(self):
        with pytest.raises(SpecError):
            request(weights=(0.0, 0.0, 0.0))

    def test_negative_weight_rejected(self):
        with pytest.raises(SpecError):
            request(weights=(1.0, -0.5, 0.0))

    def test_corner_selection_complete(self):
        with pytest.raises(SpecError, match="cycle_time"):
            OptimizationRequest(
                "1rw", {"word_depth": 1, "word_width": 1},
                {"dynamic_power": "typ", "leakage": "typ", "access_time": "typ"},
            )


class TestOptimize:
    def test_candidate_count_81_single_compiler(self, zoo4):
        specs = [s for s in zoo4["specs"] if s.compiler_id == "alpha"]
        result = optimize(request(), zoo4["zoo"], specs)
        assert result.diagnostics["candidates_total"] == 81

    def test_candidate_count_324_four_compilers(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        assert result.diagnostics["candidates_total"] == 324

    def test_all_lists_same_solution_set(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        keys = {
            dim: sorted(e.parametrization.key() for e in entries)
            for dim, entries in result.rankings.items()
        }
        assert all(k == keys["area"] for k in keys.values())

    def test_each_list_ascending(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        for dim, entries in result.rankings.items():
            values = [e.value for e in entries]
            assert values == sorted(values), dim

    def test_rank1_equals_linear_scan(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        by_area = min(result.candidates, key=lambda c: c[1].area)
        assert result.rankings["area"][0].parametrization.key() == by_area[0].key()

    def test_stable_sort_oracle_equivalence(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        values = [c[1].get("leakage", "typ") for c in result.candidates]
        order = np.argsort(np.array(values), kind="stable")
        expected = [result.candidates[i][0].key() for i in order]
        got = [e.parametrization.key() for e in result.rankings["leakage"]]
        assert got == expected

    def test_frequency_filter_unattainable(self, zoo4):
        result = optimize(request(freq=1e9), zoo4["zoo"], zoo4["specs"])
        assert all(len(v) == 0 for v in result.rankings.values())
        assert result.diagnostics["filtered_by_frequency"] == result.diagnostics["candidates_total"]

    def test_filter_monotone_in_target(self, zoo4):
        sizes = []
        for freq in (None, 300.0, 500.0, 800.0, 1e9):
            result = optimize(request(freq=freq), zoo4["zoo"], zoo4["specs"])
            members = {e.parametrization.key() for e in result.rankings["area"]}
            sizes.append(members)
        for bigger, smaller in zip(sizes, sizes[1:]):
            assert smaller <= bigger

    def test_frequency_semantics(self, zoo4):
        target = 450.0
        result = optimize(request(freq=target), zoo4["zoo"], zoo4["specs"])
        for e in result.rankings["area"]:
            assert 1000.0 / e.ppa.get("cycle_time", "typ") >= target

    def test_missing_model_is_hard_error(self, zoo4, tmp_path):
        empty = mz.Zoo(tmp_path)
        with pytest.raises(MissingModel, match="alpha"):
            optimize(request(), empty, zoo4["specs"])

    def test_no_port_match(self, zoo4):
        req = OptimizationRequest(
            "4rw", {"word_depth": 1024, "word_width": 32},
            {d: "typ" for d in ("dynamic_power", "leakage", "access_time", "cycle_time")},
        )
        with pytest.raises(EmptySearchSpace):
            optimize(req, zoo4["zoo"], zoo4["specs"])

    def test_unknown_corner_rejected(self, zoo4):
        req = OptimizationRequest(
            "1rw", {"word_depth": 1024, "word_width": 32, "dual_rail": 0},
            {d: "nope" for d in ("dynamic_power", "leakage", "access_time", "cycle_time")},
        )
        with pytest.raises(SpecError, match="nope"):
            optimize(req, zoo4["zoo"], zoo4["specs"])

    def test_cycle_time_never_a_ranking_key(self, zoo4):
        assert "cycle_time" not in RANKING_DIMENSIONS
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        assert set(result.rankings) == set(RANKING_DIMENSIONS)

    def test_dynamic_metric_max_rw(self, zoo4):
        result = optimize(request(dynamic_metric="max_rw"), zoo4["zoo"], zoo4["specs"])
        for e in result.rankings["dynamic_power"][:5]:
            expected = max(e.ppa.get("read_power", "typ"), e.ppa.get("write_power", "typ"))
            assert e.value == expected


class TestWeightedRanking:
    def scalers(self):
        return DimensionScalers(
            mean={"dynamic_power": 8.0, "leakage": 500.0, "area": 800.0},
            std={"dynamic_power": 2.0, "leakage": 100.0, "area": 400.0},
            provenance=("test",),
        )

    def ppa(self, dyn=10.0, leak=500.0, area=1000.0):
        return PpaRecord({
            "area": area, "read_power@typ": dyn, "write_power@typ": dyn * 1.1,
            "leakage@typ": leak, "access_time@typ": 1.0, "cycle_time@typ": 1.2,
        })

    def corner_sel(self):
        return {"dynamic_power": "typ", "leakage": "typ",
                "access_time": "typ", "cycle_time": "typ"}

    def test_hand_computed_value(self):
        value = weighted_rank_value(self.ppa(), self.scalers(), (1, 1, 1), self.corner_sel())
        assert value == pytest.approx(1.0 + 0.0 + 0.5, abs=1e-12)

    def test_single_weight_matches_dimension_order(self, zoo4):
        result = optimize(request(weights=(1.0, 0.0, 0.0)), zoo4["zoo"], zoo4["specs"])
        dyn_order = [e.parametrization.key() for e in result.rankings["dynamic_power"]]
        weighted_order = [e.parametrization.key() for e in result.rankings["weighted_sum"]]
        assert dyn_order == weighted_order

    def test_unit_change_leaves_order_unchanged(self, zoo4):
        result = optimize(request(), zoo4["zoo"], zoo4["specs"])
        scalers = result.dimension_scalers
        factor = 1000.0
        scaled = DimensionScalers(
            mean=dict(scalers.mean, leakage=scalers.mean["leakage"] * factor),
            std=dict(scalers.std, leakage=scalers.std["leakage"] * factor),
            provenance=scalers.provenance,
        )
        corner_sel = self.corner_sel()
        originals = []
        rescaled = []
        for p, ppa in result.candidates:
            originals.append(weighted_rank_value(ppa, scalers, (1, 1, 1), corner_sel))
            boosted = PpaRecord({
                k: v * factor if k.startswith("leakage@") else v
                for k, v in ppa.values.items()
            })
            rescaled.append(weighted_rank_value(boosted, scaled, (1, 1, 1), corner_sel))
        assert list(np.argsort(originals, kind="stable")) == list(
            np.argsort(rescaled, kind="stable")
        )

    def test_pooled_scaler_statistics(self, zoo4):
        models = [zoo4["zoo"].get(s.compiler_id, s.version) for s in zoo4["specs"]]
        scalers = dimension_scalers_from_zoo(models, self.corner_sel())
        # oracle: concatenate the per-model training targets
        idx = models[0].variable_names.index("area")
        all_means = []
        for m in models:
            all_means += [m.metadata["y_raw_mean"][idx]] * m.metadata["n_train"]
        assert scalers.mean["area"] == pytest.approx(np.mean(all_means), rel=1e-12)
        assert scalers.std["area"] > 0


class TestVerifySelection:
    def test_perfect_model_zero_report(self, tiny_spec, tiny_coeffs, oracle_record):
        p = ds.sample_parametrizations(tiny_spec, 1, 4)[0]
        report = verify_selection(p, tiny_spec, tiny_coeffs, oracle_record)
        assert report["median"] == 0 and report["max"] == 0

    def test_trained_model_matches_direct_spb(self, tiny_spec, tiny_coeffs, small_model):
        from memopt.evalmetrics import spb
        from memopt.synthcompiler import compile as oracle_compile
        p = ds.sample_parametrizations(tiny_spec, 1, 4)[0]
        record = small_model["record"]
        report = verify_selection(p, tiny_spec, tiny_coeffs, record)
        truth = oracle_compile(tiny_spec, tiny_coeffs, p)
        predicted = record.predict(tiny_spec, [p])[0]
        for name in truth.values:
            assert report["per_variable"][name] == pytest.approx(
                spb(predicted.values[name], truth.values[name]), rel=1e-12
            )

    def test_invalid_selection_rejected(self, tiny_spec, tiny_coeffs, small_model):
        from memopt.exceptions import ParametrizationInvalid
        bad = Parametrization("tiny", "1.0", {
            "word_depth": 32, "word_width": 8, "banks": 2, "periphery_vt": "low",
        })  # depth<64 restricts banks to 1
        with pytest.raises(ParametrizationInvalid):
            verify_selection(bad, tiny_spec, tiny_coeffs, small_model["record"])
