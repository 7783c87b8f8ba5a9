import json
import time
from pathlib import Path

import numpy as np
import pytest

from memopt import dataset as ds
from memopt import fixtures
from memopt import modelzoo as mz
from memopt import neuralnet as nn
from memopt.synthcompiler import CoefficientSet, compile as oracle_compile

GOLDEN_DIR = Path(__file__).parent / "golden"


def load_golden(name):
    return json.loads((GOLDEN_DIR / name).read_text())


@pytest.fixture(scope="session")
def alpha_spec():
    return fixtures.make_alpha()


@pytest.fixture(scope="session")
def alpha_coeffs(alpha_spec):
    return CoefficientSet.generate(alpha_spec)


@pytest.fixture(scope="session")
def tiny_spec():
    return fixtures.make_tiny()


@pytest.fixture(scope="session")
def tiny_coeffs(tiny_spec):
    return CoefficientSet.generate(tiny_spec)


@pytest.fixture(scope="session")
def quality_model(alpha_spec, alpha_coeffs):
    """The 2,500-observation acceptance fixture: trained default network,
    its splits and training log, plus wall-clock cost."""
    t0 = time.perf_counter()
    params = ds.sample_parametrizations(alpha_spec, 2500, 42)
    obs = ds.build_observations(alpha_spec, alpha_coeffs, params, n_workers=1)
    record, parts, log = mz.train_on_observations(
        alpha_spec, obs, nn.Architecture(), nn.TrainConfig(rng_seed=1),
        split_seed=2, init_seed=3,
    )
    record.freeze()
    return {
        "record": record,
        "parts": parts,
        "log": log,
        "observations": obs,
        "seconds": time.perf_counter() - t0,
    }


@pytest.fixture(scope="session")
def zoo4(tmp_path_factory):
    """Four trained 1rw models (alpha..delta) with held-out test sets."""
    zoo_dir = tmp_path_factory.mktemp("zoo4")
    zoo = mz.Zoo(zoo_dir)
    specs = [fixtures.make_alpha(), fixtures.make_beta(),
             fixtures.make_gamma(), fixtures.make_delta()]
    test_sets = {}
    for spec in specs:
        coeffs = CoefficientSet.generate(spec)
        params = ds.sample_parametrizations(spec, 1200, 42)
        obs = ds.build_observations(spec, coeffs, params, n_workers=1)
        record, parts, _ = mz.train_on_observations(
            spec, obs, nn.Architecture(), nn.TrainConfig(rng_seed=1),
            split_seed=2, init_seed=3,
        )
        record.freeze()
        zoo.save(record)
        test_sets[(spec.compiler_id, spec.version)] = parts.test
    return {"zoo": zoo, "specs": specs, "test_sets": test_sets, "dir": zoo_dir}


@pytest.fixture(scope="session")
def small_model(tiny_spec, tiny_coeffs):
    """A cheap trained model on the tiny space for mechanics tests."""
    params = ds.sample_parametrizations(tiny_spec, 240, 5)
    obs = ds.build_observations(tiny_spec, tiny_coeffs, params, n_workers=1)
    record, parts, log = mz.train_on_observations(
        tiny_spec, obs, nn.Architecture(), nn.TrainConfig(max_epochs=1200, rng_seed=9),
        split_seed=10, init_seed=11,
    )
    record.freeze()
    return {"record": record, "parts": parts, "log": log, "observations": obs}


class OracleRecord:
    """Duck-typed model record that answers with exact ground truth by
    decoding encoded inputs back to parametrizations. Optionally applies a
    fixed multiplicative bias or per-observation error factors."""

    def __init__(self, spec, coeffs, factor=1.0):
        self.spec = spec
        self.coeffs = coeffs
        self.factor = factor
        self.compiler_id = spec.compiler_id
        self.version = spec.version
        from memopt.synthcompiler import ppa_variable_names

        self.feature_names = ds.feature_names(spec)
        self.variable_names = ppa_variable_names(spec)
        sample = ds.sample_parametrizations(spec, 80, 123)
        Y = np.stack([
            oracle_compile(spec, coeffs, p).to_vector(spec) for p in sample
        ])
        self.metadata = {
            "n_train": Y.shape[0],
            "y_raw_mean": [float(v) for v in Y.mean(axis=0)],
            "y_raw_std": [float(v) for v in Y.std(axis=0)],
        }

    def _decode(self, row):
        values = {}
        for i, name in enumerate(self.spec.param_names):
            if name in ("word_depth", "word_width"):
                values[name] = int(round(row[i]))
            else:
                pd = self.spec.param_def(name)
                values[name] = pd.choices[int(round(row[i]))]
        from memopt.paramspace import Parametrization

        return Parametrization(self.spec.compiler_id, self.spec.version, values)

    def predict_matrix(self, X):
        Y = np.stack([
            oracle_compile(self.spec, self.coeffs, self._decode(row)).to_vector(self.spec)
            for row in np.atleast_2d(X)
        ])
        return Y * self.factor, 0

    def predict(self, spec, parametrizations):
        from memopt.synthcompiler import PpaRecord

        out = []
        for p in parametrizations:
            rec = oracle_compile(self.spec, self.coeffs, p)
            out.append(PpaRecord({k: v * self.factor for k, v in rec.values.items()}))
        return out


@pytest.fixture(scope="session")
def oracle_record(tiny_spec, tiny_coeffs):
    return OracleRecord(tiny_spec, tiny_coeffs)
