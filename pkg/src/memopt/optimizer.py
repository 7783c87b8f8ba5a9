"""Exhaustive search over legal parametrizations with model-predicted PPA.

Results come back as four ranked lists over the same solution set:
dynamic power, leakage, area, and a z-score weighted sum of the three.
Cycle time is never a ranking key; it only powers the frequency
threshold filter. Ties break on the deterministic enumeration order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptySearchSpace, MissingModel, ModelNotFound, SpecError
from .modelzoo import Zoo
from .paramspace import CompilerSpec, Parametrization, enumerate_solutions
from .synthcompiler import CoefficientSet, PpaRecord, compile as oracle_compile

RANKING_DIMENSIONS = ("dynamic_power", "leakage", "area", "weighted_sum")
CORNER_SELECTED_DIMENSIONS = ("dynamic_power", "leakage", "access_time", "cycle_time")


@dataclass(frozen=True)
class OptimizationRequest:
    """What the chip designer fixes, selects and weighs for one run."""

    port_config: str
    fixed: dict                      # must contain word_depth and word_width
    corner_selection: dict           # dimension -> corner name
    frequency_target_mhz: float | None = None
    weights: tuple = (1.0, 1.0, 1.0)  # (dynamic power, leakage, area)
    dynamic_metric: str = "read"      # "read" or "max_rw"

    def __post_init__(self):
        for name in ("word_depth", "word_width"):
            if name not in self.fixed:
                raise SpecError(f"fixed parameters must include {name}")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise SpecError("weights must be three non-negative numbers")
        if not any(w > 0 for w in self.weights):
            raise SpecError("weights must not all be zero")
        if self.dynamic_metric not in ("read", "max_rw"):
            raise SpecError(f"unknown dynamic metric {self.dynamic_metric!r}")
        missing = [d for d in CORNER_SELECTED_DIMENSIONS if d not in self.corner_selection]
        if missing:
            raise SpecError(f"corner_selection missing dimensions: {missing}")


@dataclass(frozen=True)
class DimensionScalers:
    """Standardization statistics for the weighted ranking, pooled from
    the training data of the applicable compilers' models."""

    mean: dict
    std: dict
    provenance: tuple

    def z(self, dimension: str, value: float) -> float:
        return (value - self.mean[dimension]) / self.std[dimension]


@dataclass
class RankedEntry:
    parametrization: Parametrization
    ppa: PpaRecord
    value: float


@dataclass
class RankedResults:
    rankings: dict[str, list[RankedEntry]]
    diagnostics: dict
    elapsed_seconds: float
    dimension_scalers: DimensionScalers | None = None
    # surviving candidates in enumeration order (tie-break base for rankings)
    candidates: list[tuple] = field(default_factory=list)


def _dynamic_value(ppa: PpaRecord, corner: str, metric: str) -> float:
    read = ppa.get("read_power", corner)
    if metric == "max_rw":
        return max(read, ppa.get("write_power", corner))
    return read


def weighted_rank_value(
    ppa: PpaRecord,
    scalers: DimensionScalers,
    weights: tuple,
    corner_selection: dict,
    dynamic_metric: str = "read",
) -> float:
    """w_dyn * z(dynamic) + w_leak * z(leakage) + w_area * z(area)."""
    w_dyn, w_leak, w_area = weights
    dyn = _dynamic_value(ppa, corner_selection["dynamic_power"], dynamic_metric)
    leak = ppa.get("leakage", corner_selection["leakage"])
    return (
        w_dyn * scalers.z("dynamic_power", dyn)
        + w_leak * scalers.z("leakage", leak)
        + w_area * scalers.z("area", ppa.area)
    )


def _pooled_stats(models: list, variable: str) -> tuple[float, float]:
    """Combine per-model training means/stds into the statistics of the
    concatenated training data (weighted by training-set size)."""
    total = 0
    mean_acc = 0.0
    sq_acc = 0.0
    for record in models:
        idx = record.variable_names.index(variable)
        n = record.metadata["n_train"]
        mu = record.metadata["y_raw_mean"][idx]
        sd = record.metadata["y_raw_std"][idx]
        total += n
        mean_acc += n * mu
        sq_acc += n * (sd * sd + mu * mu)
    mean = mean_acc / total
    var = sq_acc / total - mean * mean
    std = float(np.sqrt(max(var, 0.0)))
    if std <= 0:
        raise SpecError(f"degenerate dimension scaler for {variable}")
    return float(mean), std


def dimension_scalers_from_zoo(models: list, corner_selection: dict) -> DimensionScalers:
    mean, std = {}, {}
    mean["area"], std["area"] = _pooled_stats(models, "area")
    mean["dynamic_power"], std["dynamic_power"] = _pooled_stats(
        models, f"read_power@{corner_selection['dynamic_power']}"
    )
    mean["leakage"], std["leakage"] = _pooled_stats(
        models, f"leakage@{corner_selection['leakage']}"
    )
    return DimensionScalers(
        mean, std, tuple(f"{r.compiler_id}@{r.version}" for r in models)
    )


def optimize(
    request: OptimizationRequest, zoo: Zoo, specs: list[CompilerSpec]
) -> RankedResults:
    """Enumerate, predict, filter by frequency, rank four ways."""
    t0 = time.perf_counter()
    port_specs = [s for s in specs if s.port_config == request.port_config]
    if not port_specs:
        raise EmptySearchSpace(f"no compiler with port config {request.port_config!r}")
    solutions, diag = enumerate_solutions(port_specs, request.fixed)

    # corner checks against the specs that actually contributed candidates
    contributing = [
        s for s in port_specs if diag["per_spec_counts"].get(f"{s.compiler_id}@{s.version}", 0) > 0
    ]
    for spec in contributing:
        names = set(spec.corner_names())
        for dim, corner in request.corner_selection.items():
            if corner not in names:
                raise SpecError(
                    f"corner {corner!r} selected for {dim} does not exist in "
                    f"{spec.compiler_id}@{spec.version}"
                )

    # batched prediction per compiler version, preserving enumeration order
    models = {}
    for spec in contributing:
        try:
            models[(spec.compiler_id, spec.version)] = zoo.get(spec.compiler_id, spec.version)
        except ModelNotFound:
            raise MissingModel(
                f"no frozen model for applicable compiler {spec.compiler_id}@{spec.version}"
            ) from None
    spec_by_key = {(s.compiler_id, s.version): s for s in contributing}
    predictions: list[PpaRecord] = [None] * len(solutions)
    order_by_key: dict[tuple, list[int]] = {}
    for i, p in enumerate(solutions):
        order_by_key.setdefault((p.compiler_id, p.version), []).append(i)
    for key, idxs in order_by_key.items():
        ppas = models[key].predict(spec_by_key[key], [solutions[i] for i in idxs])
        for i, ppa in zip(idxs, ppas):
            predictions[i] = ppa

    cycle_corner = request.corner_selection["cycle_time"]
    kept = list(range(len(solutions)))
    filtered = 0
    if request.frequency_target_mhz is not None:
        kept = [
            i for i in kept
            if 1000.0 / predictions[i].get("cycle_time", cycle_corner)
            >= request.frequency_target_mhz
        ]
        filtered = len(solutions) - len(kept)

    scalers = dimension_scalers_from_zoo(list(models.values()), request.corner_selection)
    dyn_corner = request.corner_selection["dynamic_power"]
    leak_corner = request.corner_selection["leakage"]
    values = {
        "dynamic_power": [
            _dynamic_value(predictions[i], dyn_corner, request.dynamic_metric) for i in kept
        ],
        "leakage": [predictions[i].get("leakage", leak_corner) for i in kept],
        "area": [predictions[i].area for i in kept],
        "weighted_sum": [
            weighted_rank_value(
                predictions[i], scalers, request.weights,
                request.corner_selection, request.dynamic_metric,
            )
            for i in kept
        ],
    }
    rankings = {}
    for dim in RANKING_DIMENSIONS:
        arr = np.array(values[dim])
        order = np.argsort(arr, kind="stable")
        rankings[dim] = [
            RankedEntry(solutions[kept[j]], predictions[kept[j]], float(arr[j]))
            for j in order
        ]
    diagnostics = {
        "candidates_total": len(solutions),
        "filtered_by_frequency": filtered,
        "compilers_skipped": diag["skipped"],
        "per_spec_counts": diag["per_spec_counts"],
        "results": len(kept),
        "corner_selection": dict(request.corner_selection),
        "weights": list(request.weights),
        "dynamic_metric": request.dynamic_metric,
    }
    return RankedResults(
        rankings=rankings,
        diagnostics=diagnostics,
        elapsed_seconds=time.perf_counter() - t0,
        dimension_scalers=scalers,
        candidates=[(solutions[i], predictions[i]) for i in kept],
    )


def verify_selection(
    selected: Parametrization,
    spec: CompilerSpec,
    coeffs: CoefficientSet,
    record,
) -> dict:
    """Compile the selected parametrization with the ground-truth oracle
    and report per-variable SPB of the model's prediction against it."""
    truth = oracle_compile(spec, coeffs, selected)
    predicted = record.predict(spec, [selected])[0]
    from .evalmetrics import spb

    per_variable = {
        name: spb(predicted.values[name], truth.values[name])
        for name in truth.values
    }
    values = list(per_variable.values())
    return {
        "per_variable": per_variable,
        "median": float(np.median(values)),
        "max": float(np.max(values)),
        "prediction": predicted.values,
        "ground_truth": truth.values,
    }
