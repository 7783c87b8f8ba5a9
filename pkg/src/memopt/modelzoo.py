"""Frozen per-compiler-version models: persistence, prediction, and the
error-driven iterative build loop.

One record per (compiler_id, version). Records freeze after training:
mutation attempts raise, parameter arrays are marked read-only, and
persisted predictions stay stable across restarts.
"""

from __future__ import annotations

import base64
import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import evalmetrics as em
from . import neuralnet as nn
from .exceptions import (
    FormatVersionError,
    FrozenRecordError,
    ModelNotFound,
    ParametrizationInvalid,
    SpecError,
)
from .paramspace import CompilerSpec, Parametrization, validate
from .synthcompiler import CoefficientSet, PpaRecord, compile_batch, ppa_variable_names

MODEL_FORMAT_VERSION = 1
DEFAULT_QUALITY_TARGET = 3.0  # median symmetric percentage bias, percent


class ModelRecord:
    """A trained network plus its scalers and training metadata."""

    def __init__(
        self,
        compiler_id: str,
        version: str,
        architecture: nn.Architecture,
        network: nn.Network,
        scalers: ds.ScalerSet,
        feature_names: list[str],
        variable_names: list[str],
        metadata: dict,
        frozen: bool = False,
        format_version: int = MODEL_FORMAT_VERSION,
    ):
        if scalers.n_features != network.input_dim or scalers.n_targets != network.output_dim:
            raise SpecError("scaler dimensions do not match network dimensions")
        self.compiler_id = compiler_id
        self.version = version
        self.architecture = architecture
        self.network = network
        self.scalers = scalers
        self.feature_names = list(feature_names)
        self.variable_names = list(variable_names)
        self.metadata = dict(metadata)
        self.format_version = format_version
        self.frozen = False
        if frozen:
            self.freeze()

    def __setattr__(self, name, value):
        if getattr(self, "frozen", False):
            raise FrozenRecordError(f"record {self.key()} is frozen; cannot set {name}")
        super().__setattr__(name, value)

    def key(self) -> tuple[str, str]:
        return (self.compiler_id, self.version)

    def freeze(self) -> None:
        if self.frozen:
            return
        for arr in self.network.weights + self.network.biases:
            arr.flags.writeable = False
        super().__setattr__("frozen", True)

    def predict_matrix(self, X_raw: np.ndarray) -> tuple[np.ndarray, int]:
        """Encoded inputs -> targets in original units; one batched forward
        pass. Returns (Y, clamped_count)."""
        Xs = ds.transform_x(self.scalers, X_raw)
        Ys = nn.forward(self.network, Xs)
        Y, clamped = ds.inverse_transform_y(self.scalers, Ys)
        return Y, int(clamped.sum())

    def predict(
        self, spec: CompilerSpec, parametrizations: list[Parametrization]
    ) -> list[PpaRecord]:
        if (spec.compiler_id, spec.version) != self.key():
            raise SpecError(f"record {self.key()} cannot predict for {spec.compiler_id}@{spec.version}")
        for i, p in enumerate(parametrizations):
            ok, violations = validate(spec, p)
            if not ok:
                raise ParametrizationInvalid(
                    f"parametrization at index {i} is illegal: {violations}", violations
                )
        if not parametrizations:
            return []
        X = np.stack([ds.encode(spec, p) for p in parametrizations])
        Y, _ = self.predict_matrix(X)
        return [PpaRecord.from_vector(spec, row) for row in Y]


# ---------------------------------------------------------------------------
# Persistence: self-describing JSON, parameter blocks as base64 of
# little-endian float64 bytes.


def _enc(arr: np.ndarray) -> dict:
    a = np.asarray(arr, dtype=np.float64)
    return {"shape": list(a.shape), "data": base64.b64encode(a.astype("<f8").tobytes()).decode()}


def _dec(doc: dict) -> np.ndarray:
    raw = np.frombuffer(base64.b64decode(doc["data"]), dtype="<f8")
    return np.ascontiguousarray(raw.reshape(doc["shape"]).astype(np.float64, copy=True))


def record_to_dict(record: ModelRecord) -> dict:
    s = record.scalers
    return {
        "format_version": record.format_version,
        "kind": "memopt-model",
        "compiler_id": record.compiler_id,
        "version": record.version,
        "architecture": dataclasses.asdict(record.architecture),
        "input_dim": record.network.input_dim,
        "output_dim": record.network.output_dim,
        "feature_names": record.feature_names,
        "variable_names": record.variable_names,
        "weights": [_enc(W) for W in record.network.weights],
        "biases": [_enc(b) for b in record.network.biases],
        "scalers": {
            "x_mean": _enc(s.x_mean), "x_std": _enc(s.x_std),
            "x_min": _enc(s.x_min), "x_max": _enc(s.x_max),
            "y_sqrt": [bool(v) for v in s.y_sqrt],
            "y_mean": _enc(s.y_mean), "y_std": _enc(s.y_std),
            "y_min": _enc(s.y_min), "y_max": _enc(s.y_max),
        },
        "metadata": record.metadata,
        "frozen": record.frozen,
    }


def record_from_dict(doc: dict) -> ModelRecord:
    if doc.get("kind") != "memopt-model":
        raise FormatVersionError("not a model record document")
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise FormatVersionError(
            f"model format_version {doc.get('format_version')} is not supported "
            f"(expected {MODEL_FORMAT_VERSION}); migrate explicitly"
        )
    arch = nn.Architecture(**doc["architecture"])
    weights = [_dec(w) for w in doc["weights"]]
    biases = [_dec(b) for b in doc["biases"]]
    net = nn.Network(weights, biases, arch, doc["input_dim"], doc["output_dim"])
    sc = doc["scalers"]
    scalers = ds.ScalerSet(
        x_mean=_dec(sc["x_mean"]), x_std=_dec(sc["x_std"]),
        x_min=_dec(sc["x_min"]), x_max=_dec(sc["x_max"]),
        y_sqrt=np.array(sc["y_sqrt"], dtype=bool),
        y_mean=_dec(sc["y_mean"]), y_std=_dec(sc["y_std"]),
        y_min=_dec(sc["y_min"]), y_max=_dec(sc["y_max"]),
    )
    return ModelRecord(
        doc["compiler_id"], doc["version"], arch, net, scalers,
        doc["feature_names"], doc["variable_names"], doc["metadata"],
        frozen=doc.get("frozen", True),
    )


def model_filename(compiler_id: str, version: str) -> str:
    return f"{compiler_id}__{version}.model.json"


class Zoo:
    """Directory of model records with an index file; entries are immutable."""

    INDEX = "index.json"

    def __init__(self, directory):
        self.directory = Path(directory)
        self._records: dict[tuple[str, str], ModelRecord] = {}

    def _index_path(self) -> Path:
        return self.directory / self.INDEX

    def _read_index(self) -> dict:
        path = self._index_path()
        if not path.exists():
            return {"format_version": MODEL_FORMAT_VERSION, "entries": []}
        doc = json.loads(path.read_text())
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise FormatVersionError(f"zoo index format_version {doc.get('format_version')}")
        return doc

    def entries(self) -> list[dict]:
        return self._read_index()["entries"]

    def save(self, record: ModelRecord) -> Path:
        if not record.frozen:
            record.freeze()
        self.directory.mkdir(parents=True, exist_ok=True)
        fname = model_filename(*record.key())
        (self.directory / fname).write_text(json.dumps(record_to_dict(record)) + "\n")
        index = self._read_index()
        index["entries"] = [
            e for e in index["entries"]
            if (e["compiler_id"], e["version"]) != record.key()
        ] + [{"compiler_id": record.compiler_id, "version": record.version, "file": fname}]
        index["entries"].sort(key=lambda e: (e["compiler_id"], e["version"]))
        self._index_path().write_text(json.dumps(index, indent=2) + "\n")
        self._records[record.key()] = record
        return self.directory / fname

    def get(self, compiler_id: str, version: str) -> ModelRecord:
        key = (compiler_id, version)
        if key in self._records:
            return self._records[key]
        for entry in self.entries():
            if (entry["compiler_id"], entry["version"]) == key:
                doc = json.loads((self.directory / entry["file"]).read_text())
                record = record_from_dict(doc)
                self._records[key] = record
                return record
        raise ModelNotFound(f"no model for {compiler_id}@{version} in {self.directory}")

    def keys(self) -> list[tuple[str, str]]:
        return [(e["compiler_id"], e["version"]) for e in self.entries()]


def save(record: ModelRecord, store) -> Path:
    return Zoo(store).save(record)


def load(store, compiler_id: str, version: str) -> ModelRecord:
    return Zoo(store).get(compiler_id, version)


# ---------------------------------------------------------------------------
# Iterative error-driven build.


@dataclass
class BuildLog:
    iterations: list[dict] = field(default_factory=list)
    below_target: bool = False
    reason: str = ""


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def make_record(
    spec: CompilerSpec,
    net: nn.Network,
    scalers: ds.ScalerSet,
    metadata: dict,
    frozen: bool = False,
) -> ModelRecord:
    return ModelRecord(
        spec.compiler_id,
        spec.version,
        net.architecture,
        net,
        scalers,
        ds.feature_names(spec),
        ppa_variable_names(spec),
        metadata,
        frozen=frozen,
    )


def train_on_observations(
    spec: CompilerSpec,
    observations: list[ds.Observation],
    arch: nn.Architecture,
    config: nn.TrainConfig,
    split_seed: int,
    init_seed: int,
) -> tuple[ModelRecord, ds.SplitDataset, nn.TrainingLog]:
    """Split, scale, train; returns an unfrozen record plus the split."""
    parts = ds.split(observations, split_seed)
    scalers = ds.fit_scalers(parts.train)
    Xtr, Ytr = ds.as_matrices([ds.transform(scalers, o) for o in parts.train])
    Xva, Yva = ds.as_matrices([ds.transform(scalers, o) for o in parts.validation])
    net = nn.init(arch, Xtr.shape[1], Ytr.shape[1], seed=init_seed)
    net, log = nn.train(net, Xtr, Ytr, Xva if len(parts.validation) else None,
                        Yva if len(parts.validation) else None, config)
    Y_raw = np.stack([o.y for o in parts.train])
    metadata = {
        "dataset_size": len(observations),
        "n_train": len(parts.train),
        "n_validation": len(parts.validation),
        "n_test": len(parts.test),
        "split_seed": split_seed,
        "init_seed": init_seed,
        "train_seed": config.rng_seed,
        "stopped_epoch": log.stopped_epoch,
        "best_epoch": log.best_epoch,
        "best_validation_loss": log.best_val_loss,
        "stop_reason": log.stop_reason,
        "y_raw_mean": [float(v) for v in Y_raw.mean(axis=0)],
        "y_raw_std": [float(v) for v in Y_raw.std(axis=0)],
    }
    return make_record(spec, net, scalers, metadata), parts, log


def iterative_build(
    spec: CompilerSpec,
    coeffs: CoefficientSet,
    quality_target: float = DEFAULT_QUALITY_TARGET,
    batch_size: int = 500,
    max_observations: int = 6000,
    master_seed: int = 0,
    arch: nn.Architecture | None = None,
    config: nn.TrainConfig | None = None,
    n_bins: int = 10,
    n_workers: int = 20,
    simulated_latency: float | None = None,
) -> tuple[ModelRecord, BuildLog]:
    """Generate data in batches until every PPA dimension's median error
    meets the quality target (or the observation budget runs out).

    Each batch is sampled over the whole space, then memories falling in
    size ranges that already meet the target (per the 10-bin size report)
    are dropped before compilation, so batch sizes shrink as the model
    matures. Training restarts from scratch on the accumulated data every
    iteration. Fully reproducible for a fixed master seed.
    """
    arch = arch or nn.Architecture()
    base_config = config or nn.TrainConfig()
    log = BuildLog()
    observations: list[ds.Observation] = []
    excluded: list[tuple[float, float]] = []
    record = None
    iteration = 0

    while True:
        candidates = ds.sample_parametrizations(
            spec, batch_size, _derived_seed(master_seed, 11, iteration)
        )
        kept = [
            p for p in candidates
            if not any(lo <= p.size_bits <= hi for lo, hi in excluded)
        ]
        batch = ds.build_observations(
            spec, coeffs, kept, simulated_latency=simulated_latency, n_workers=n_workers
        )
        observations.extend(batch)
        if not observations:
            raise SpecError("first batch produced no observations")

        run_config = dataclasses.replace(
            base_config, rng_seed=_derived_seed(master_seed, 13, iteration)
        )
        record, parts, _ = train_on_observations(
            spec,
            observations,
            arch,
            run_config,
            split_seed=_derived_seed(master_seed, 17, iteration),
            init_seed=_derived_seed(master_seed, 19, iteration),
        )
        report = em.error_report(record, spec, parts.test)
        bins = em.size_bin_report(record, spec, parts.test, n_bins=n_bins)
        excluded = [
            (b["lo"], b["hi"]) for b in bins.bins if b["error"] <= quality_target
        ]
        log.iterations.append(
            {
                "iteration": iteration,
                "batch_requested": batch_size,
                "batch_kept": len(batch),
                "total_observations": len(observations),
                "per_dimension_error": dict(report.per_dimension),
                "excluded_ranges": [[lo, hi] for lo, hi in excluded],
            }
        )
        met = all(v <= quality_target for v in report.per_dimension.values())
        if met:
            log.reason = "quality_target_met"
            break
        if len(observations) >= max_observations:
            log.below_target = True
            log.reason = "max_observations"
            break
        if not batch and iteration > 0:
            log.below_target = True
            log.reason = "stalled_all_sizes_excluded"
            break
        iteration += 1

    record.metadata["quality_target"] = quality_target
    record.metadata["below_target"] = log.below_target
    record.metadata["build_reason"] = log.reason
    record.metadata["per_dimension_error"] = log.iterations[-1]["per_dimension_error"]
    record.freeze()
    return record, log


def throughput_bench(
    record: ModelRecord,
    spec: CompilerSpec,
    sample_counts=(1, 10, 100, 1_000, 10_000, 100_000),
    repeats: int = 25,
    rng_seed: int = 0,
) -> list[dict]:
    """Inference timing per sample count: scaled inputs to PPA in original
    units (set-up work such as model loading and input preprocessing is
    excluded). Minimum over repeats, plus the scale factor relative to a
    single prediction."""
    rng = np.random.default_rng(rng_seed)
    n_max = max(sample_counts)
    base = ds.sample_parametrizations(spec, min(n_max, 512), rng_seed)
    X_small = ds.transform_x(record.scalers, np.stack([ds.encode(spec, p) for p in base]))
    X = X_small[rng.integers(0, X_small.shape[0], size=n_max)]
    rows = []
    for count in sample_counts:
        Xc = np.ascontiguousarray(X[:count])
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            ds.inverse_transform_y(record.scalers, nn.forward(record.network, Xc))
            best = min(best, time.perf_counter() - t0)
        rows.append({"samples": count, "seconds": best})
    t1 = rows[0]["seconds"]
    for row in rows:
        row["scale_factor"] = row["seconds"] / t1 if t1 > 0 else float("nan")
    return rows
