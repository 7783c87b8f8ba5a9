import json

import numpy as np
import pytest

from memopt import dataset as ds
from memopt import modelzoo as mz
from memopt import neuralnet as nn
from memopt.exceptions import (
    FormatVersionError,
    FrozenRecordError,
    ModelNotFound,
    ParametrizationInvalid,
)
from memopt.fixtures import make_tiny
from memopt.synthcompiler import CoefficientSet
from conftest import GOLDEN_DIR, load_golden


class TestPersistence:
    def test_round_trip_predictions_bit_identical(self, small_model, tiny_spec, tmp_path):
        record = small_model["record"]
        zoo = mz.Zoo(tmp_path)
        zoo.save(record)
        loaded = mz.load(tmp_path, "tiny", "1.0")
        params = ds.sample_parametrizations(tiny_spec, 100, 77)
        X = np.stack([ds.encode(tiny_spec, p) for p in params])
        Ya, _ = record.predict_matrix(X)
        Yb, _ = loaded.predict_matrix(X)
        assert np.array_equal(Ya, Yb)

    def test_file_size_bound(self, small_model, tmp_path):
        path = mz.Zoo(tmp_path).save(small_model["record"])
        assert path.stat().st_size <= 200 * 1024

    def test_missing_version_not_found(self, tmp_path):
        with pytest.raises(ModelNotFound):
            mz.load(tmp_path, "tiny", "9.9")

    def test_format_version_mismatch(self, small_model, tmp_path):
        zoo = mz.Zoo(tmp_path)
        path = zoo.save(small_model["record"])
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatVersionError):
            mz.Zoo(tmp_path).get("tiny", "1.0")

    def test_frozen_record_rejects_mutation(self, small_model):
        record = small_model["record"]
        with pytest.raises(FrozenRecordError):
            record.compiler_id = "other"
        with pytest.raises(ValueError):
            record.network.weights[0][0, 0] = 1.0

    def test_new_version_never_perturbs_existing(self, small_model, tiny_spec, tmp_path):
        zoo = mz.Zoo(tmp_path)
        zoo.save(small_model["record"])
        params = ds.sample_parametrizations(tiny_spec, 20, 3)
        X = np.stack([ds.encode(tiny_spec, p) for p in params])
        before, _ = mz.load(tmp_path, "tiny", "1.0").predict_matrix(X)
        v2 = mz.ModelRecord(
            "tiny", "2.0", small_model["record"].architecture,
            small_model["record"].network, small_model["record"].scalers,
            small_model["record"].feature_names, small_model["record"].variable_names,
            {}, frozen=True,
        )
        zoo.save(v2)
        after, _ = mz.load(tmp_path, "tiny", "1.0").predict_matrix(X)
        assert np.array_equal(before, after)
        assert len(mz.Zoo(tmp_path).keys()) == 2


class TestGoldenStability:
    def test_frozen_predictions_stable_across_processes(self):
        golden = load_golden("golden_predictions.json")
        nn.set_backend("python")
        try:
            record = mz.load(GOLDEN_DIR / "zoo", "tiny", "1.0")
            X = np.array(golden["inputs"])
            Y, _ = record.predict_matrix(X)
            assert np.array_equal(Y, np.array(golden["predictions"]))
        finally:
            nn.set_backend("auto")


class TestPredict:
    def test_batch_equals_single(self, small_model, tiny_spec):
        record = small_model["record"]
        params = ds.sample_parametrizations(tiny_spec, 10, 5)
        batch = record.predict(tiny_spec, params)
        singles = [record.predict(tiny_spec, [p])[0] for p in params]
        for a, b in zip(batch, singles):
            assert a.values == b.values

    def test_outputs_strictly_positive(self, small_model, tiny_spec):
        record = small_model["record"]
        params = ds.sample_parametrizations(tiny_spec, 200, 6)
        for rec in record.predict(tiny_spec, params):
            assert all(v >= 0 for v in rec.values.values())

    def test_illegal_parametrization_names_index(self, small_model, tiny_spec):
        from memopt.paramspace import Parametrization
        params = ds.sample_parametrizations(tiny_spec, 3, 5)
        params[1] = Parametrization("tiny", "1.0", dict(params[1].values, banks=7))
        with pytest.raises(ParametrizationInvalid, match="index 1"):
            small_model["record"].predict(tiny_spec, params)

    def test_throughput_and_batching(self, small_model, tiny_spec):
        rows = mz.throughput_bench(
            small_model["record"], tiny_spec,
            sample_counts=(1, 10, 100, 1000), repeats=5,
        )
        by_n = {r["samples"]: r for r in rows}
        assert by_n[1000]["scale_factor"] < 1000 * by_n[1]["scale_factor"]


class TestIterativeBuild:
    def test_easy_target_stops_after_first_batch(self, tiny_spec, tiny_coeffs):
        record, log = mz.iterative_build(
            tiny_spec, tiny_coeffs, quality_target=10.0, batch_size=400,
            max_observations=1200, master_seed=5,
            config=nn.TrainConfig(max_epochs=3000), n_workers=1,
        )
        assert log.reason == "quality_target_met"
        assert len(log.iterations) == 1
        assert record.frozen
        assert not log.below_target

    def test_unattainable_target_flags_below(self, tiny_spec, tiny_coeffs):
        record, log = mz.iterative_build(
            tiny_spec, tiny_coeffs, quality_target=0.0, batch_size=200,
            max_observations=400, master_seed=5,
            config=nn.TrainConfig(max_epochs=300), n_workers=1,
        )
        assert log.below_target
        assert log.reason == "max_observations"
        assert record.metadata["below_target"]

    def test_reproducible_build_log(self, tiny_spec, tiny_coeffs):
        kwargs = dict(
            quality_target=0.0, batch_size=150, max_observations=300,
            master_seed=9, config=nn.TrainConfig(max_epochs=200), n_workers=4,
        )
        _, log1 = mz.iterative_build(tiny_spec, tiny_coeffs, **kwargs)
        _, log2 = mz.iterative_build(tiny_spec, tiny_coeffs, **kwargs)
        assert log1.iterations == log2.iterations

    def test_batches_shrink_once_excluding(self, alpha_spec, alpha_coeffs):
        record, log = mz.iterative_build(
            alpha_spec, alpha_coeffs, quality_target=5.0, batch_size=300,
            max_observations=1200, master_seed=3,
            config=nn.TrainConfig(max_epochs=2500), n_workers=1,
        )
        kept = [it["batch_kept"] for it in log.iterations]
        excluding = [bool(it["excluded_ranges"]) for it in log.iterations]
        assert kept[0] == 300  # no exclusions on the first batch
        assert any(excluding), "expected size-range exclusions to activate"
        for i in range(1, len(kept)):
            if excluding[i - 1]:
                assert kept[i] < 300
        assert kept[-1] <= kept[0]
