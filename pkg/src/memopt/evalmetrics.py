"""Error metrics and model evaluation harnesses.

The headline relative error is the unsigned symmetric percentage bias
(exp(|ln(yhat/y)|) - 1) * 100: symmetric in over/under-prediction and
invariant under joint positive rescaling, unlike the naive signed
percentage error which rewards under-prediction. Aggregation convention
throughout: median across observations, arithmetic mean across variables
and dimensions.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dataset as ds
from . import neuralnet as nn
from .exceptions import FoldSizeError, MetricUndefined, SpecError
from .paramspace import CompilerSpec
from .synthcompiler import PPA_DIMENSIONS, dimension_members


def ape(yhat: float, y: float) -> float:
    """Signed absolute percentage error (yhat - y) / y * 100."""
    if y == 0:
        raise MetricUndefined("APE undefined for y == 0")
    return (yhat - y) / y * 100.0


def spb(yhat: float, y: float) -> float:
    """Unsigned symmetric percentage bias; requires both values positive."""
    if yhat <= 0 or y <= 0:
        raise MetricUndefined(f"SPB undefined for non-positive values ({yhat}, {y})")
    return (math.exp(abs(math.log(yhat / y))) - 1.0) * 100.0


def spb_matrix(Yhat: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, int]:
    """Elementwise SPB with NaN where the prediction is non-positive
    (clamped); returns (matrix, clamped_count). Ground truth must be
    positive."""
    Yhat = np.asarray(Yhat, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if np.any(Y <= 0):
        raise MetricUndefined("SPB undefined: ground truth contains non-positive values")
    invalid = Yhat <= 0
    safe = np.where(invalid, 1.0, Yhat)
    values = (np.exp(np.abs(np.log(safe / Y))) - 1.0) * 100.0
    values[invalid] = np.nan
    return values, int(invalid.sum())


@dataclass
class ErrorReport:
    """Median SPB per variable, mean-of-medians per dimension and overall."""

    per_variable_median: dict[str, float]
    per_dimension: dict[str, float]
    overall: float            # mean across dimensions
    variable_mean: float      # mean across all variable medians
    box_stats: dict[str, dict]
    clamped_count: int
    n_observations: int


def _box_stats(values: np.ndarray) -> dict:
    values = values[~np.isnan(values)]
    if values.size == 0:
        return {"q1": float("nan"), "median": float("nan"), "q3": float("nan"),
                "whisker_lo": float("nan"), "whisker_hi": float("nan"), "n": 0}
    q1, med, q3 = (float(np.quantile(values, q)) for q in (0.25, 0.5, 0.75))
    iqr = q3 - q1
    inside = values[(values >= q1 - 1.5 * iqr) & (values <= q3 + 1.5 * iqr)]
    return {
        "q1": q1, "median": med, "q3": q3,
        "whisker_lo": float(inside.min()), "whisker_hi": float(inside.max()),
        "n": int(values.size),
    }


def report_from_errors(
    errors: np.ndarray, variable_names: list[str], members: dict[str, list[str]],
    clamped_count: int = 0,
) -> ErrorReport:
    """Aggregate an (observations x variables) SPB matrix."""
    col = {name: i for i, name in enumerate(variable_names)}
    per_variable = {
        name: float(np.nanmedian(errors[:, i])) if errors.shape[0] else float("nan")
        for name, i in col.items()
    }
    per_dimension = {}
    box_stats = {}
    for dim in PPA_DIMENSIONS:
        if dim not in members:
            continue
        medians = [per_variable[v] for v in members[dim]]
        per_dimension[dim] = float(np.mean(medians))
        pooled = errors[:, [col[v] for v in members[dim]]].ravel()
        box_stats[dim] = _box_stats(pooled)
    overall = float(np.mean(list(per_dimension.values())))
    variable_mean = float(np.mean(list(per_variable.values())))
    return ErrorReport(
        per_variable_median=per_variable,
        per_dimension=per_dimension,
        overall=overall,
        variable_mean=variable_mean,
        box_stats=box_stats,
        clamped_count=clamped_count,
        n_observations=errors.shape[0],
    )


def _predict_errors(record, spec: CompilerSpec, observations: list[ds.Observation]):
    X, Y = ds.as_matrices(observations)
    Yhat, _ = record.predict_matrix(X)
    return spb_matrix(Yhat, Y)


def error_report(record, spec: CompilerSpec, observations: list[ds.Observation]) -> ErrorReport:
    errors, clamped = _predict_errors(record, spec, observations)
    return report_from_errors(
        errors, record.variable_names, dimension_members(spec), clamped
    )


def cross_model_report(
    items: list[tuple],
    per_model_sample_size: int,
    seed: int = 0,
) -> ErrorReport:
    """Equal-weight report across models: the same number of test
    observations is sampled from every model before pooling.

    ``items`` holds (record, spec, test_observations) triples; all models
    must share the variable layout.
    """
    if not items:
        raise SpecError("cross_model_report needs at least one model")
    variable_names = items[0][0].variable_names
    members = dimension_members(items[0][1])
    rng = np.random.default_rng(seed)
    blocks = []
    clamped_total = 0
    for record, spec, observations in items:
        if record.variable_names != variable_names:
            raise SpecError("models in a cross-model report must share the variable layout")
        k = min(per_model_sample_size, len(observations))
        idx = rng.choice(len(observations), size=k, replace=False)
        sample = [observations[i] for i in idx]
        errors, clamped = _predict_errors(record, spec, sample)
        blocks.append(errors)
        clamped_total += clamped
    return report_from_errors(
        np.vstack(blocks), variable_names, members, clamped_total
    )


@dataclass
class SizeBinReport:
    bins: list[dict]       # occupied bins only: lo, hi, error, count
    edges: list[float]
    n_total: int


def size_bin_report(
    record, spec: CompilerSpec, observations: list[ds.Observation], n_bins: int = 10
) -> SizeBinReport:
    """Median-then-mean SPB per size bin; 10 log-spaced bins over the
    observed size range, empty bins omitted."""
    if not observations:
        raise SpecError("size_bin_report needs observations")
    errors, _ = _predict_errors(record, spec, observations)
    sizes = np.array([o.size_bits for o in observations], dtype=np.float64)
    lo, hi = sizes.min(), sizes.max()
    if lo == hi:
        edges = np.array([lo, hi])
        which = np.zeros(len(sizes), dtype=int)
        n_bins = 1
    else:
        edges = np.geomspace(lo, hi, n_bins + 1)
        which = np.clip(np.searchsorted(edges, sizes, side="right") - 1, 0, n_bins - 1)
    bins = []
    for b in range(n_bins):
        mask = which == b
        if not mask.any():
            continue
        medians = np.nanmedian(errors[mask], axis=0)
        bins.append(
            {
                "lo": float(edges[b]),
                "hi": float(edges[b + 1]),
                "error": float(np.nanmean(medians)),
                "count": int(mask.sum()),
            }
        )
    return SizeBinReport(bins=bins, edges=[float(e) for e in edges], n_total=len(observations))


# ---------------------------------------------------------------------------
# Cross-validation, architecture grid search, baselines.

GRID_HIDDEN_LAYERS = (1, 2, 4, 6, 8)
GRID_MULTIPLIERS = (1, 2, 4, 6, 8, 10)
GRID_HIDDEN_ACTS = ("sigmoid", "tanh", "relu")
GRID_OUTPUT_ACTS = ("none", "relu_shifted")


def paper_grid() -> list[nn.Architecture]:
    """The full 180-architecture grid (before the size skip rule)."""
    return [
        nn.Architecture(L, M, ha, oa)
        for L in GRID_HIDDEN_LAYERS
        for M in GRID_MULTIPLIERS
        for ha in GRID_HIDDEN_ACTS
        for oa in GRID_OUTPUT_ACTS
    ]


def skip_rule(arch: nn.Architecture) -> bool:
    """Extremely large networks are skipped: 8 hidden layers with a unit
    multiplier above 6."""
    return arch.hidden_layers == 8 and arch.hidden_unit_multiplier > 6


@dataclass
class GridSearchResult:
    results: list[tuple]          # (Architecture, mean CV error), trained
    skipped: list[nn.Architecture]
    grid_total: int
    folds: int

    def best(self) -> tuple:
        return min(self.results, key=lambda r: r[1])


def _cv_splits(observations, folds: int, seed: int, val_fraction: float):
    n = len(observations)
    perm = np.random.default_rng(seed).permutation(n)
    n_val = int(n * val_fraction)
    val_idx = perm[:n_val]
    rest = perm[n_val:]
    chunks = np.array_split(rest, folds)
    val = [observations[i] for i in val_idx]
    out = []
    for k in range(folds):
        test = [observations[i] for i in chunks[k]]
        train = [observations[i] for j, c in enumerate(chunks) if j != k for i in c]
        out.append((train, val, test))
    return out


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _nn_fold_metric(train, val, test, arch, config, job_seed) -> float:
    scalers = ds.fit_scalers(train)
    Xtr, Ytr = ds.as_matrices([ds.transform(scalers, o) for o in train])
    Xva, Yva = ds.as_matrices([ds.transform(scalers, o) for o in val]) if val else (None, None)
    net = nn.init(arch, Xtr.shape[1], Ytr.shape[1], seed=_derived_seed(job_seed, 1))
    config = replace(config, rng_seed=_derived_seed(job_seed, 2))
    net, _ = nn.train(net, Xtr, Ytr, Xva, Yva, config)
    Xte, Yte = ds.as_matrices(test)
    Ys = nn.forward(net, ds.transform_x(scalers, Xte))
    Yhat, _ = ds.inverse_transform_y(scalers, Ys)
    errors, _ = spb_matrix(Yhat, Yte)
    return float(np.nanmean(np.nanmedian(errors, axis=0)))


def cross_validate_nn(
    observations, arch: nn.Architecture, folds: int = 3, seed: int = 0,
    config: nn.TrainConfig | None = None, val_fraction: float = 1.0 / 9.0,
) -> tuple[float, list[float]]:
    """Mean over folds of (median SPB per variable, averaged across
    variables); the early-stopping validation set is extracted before
    folding."""
    config = config or nn.TrainConfig()
    splits = _cv_splits(observations, folds, seed, val_fraction)
    for train, _, _ in splits:
        if len(train) < config.minibatch_size:
            raise FoldSizeError(
                f"fold training portion {len(train)} smaller than one "
                f"mini-batch ({config.minibatch_size})"
            )
    metrics = [
        _nn_fold_metric(train, val, test, arch, config, _derived_seed(seed, 5, 0, k))
        for k, (train, val, test) in enumerate(splits)
    ]
    return float(np.mean(metrics)), metrics


def grid_search(
    observations,
    grid: list[nn.Architecture] | None = None,
    folds: int = 3,
    seed: int = 0,
    config: nn.TrainConfig | None = None,
    val_fraction: float = 1.0 / 9.0,
    n_workers: int = 1,
) -> GridSearchResult:
    """Cross-validated error for every architecture in the grid, minus the
    skip rule. Job seeds derive from (seed, architecture index, fold), so
    parallel and serial runs produce identical numbers."""
    grid = list(grid) if grid is not None else paper_grid()
    config = config or nn.TrainConfig()
    splits = _cv_splits(observations, folds, seed, val_fraction)
    for train, _, _ in splits:
        if len(train) < config.minibatch_size:
            raise FoldSizeError(
                f"fold training portion {len(train)} smaller than one "
                f"mini-batch ({config.minibatch_size})"
            )
    skipped = [a for a in grid if skip_rule(a)]
    trained = [(i, a) for i, a in enumerate(grid) if not skip_rule(a)]

    def job(args):
        arch_index, arch, k = args
        train, val, test = splits[k]
        return _nn_fold_metric(train, val, test, arch, config,
                               _derived_seed(seed, 5, arch_index, k))

    jobs = [(i, a, k) for i, a in trained for k in range(folds)]
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            fold_metrics = list(pool.map(job, jobs))
    else:
        fold_metrics = [job(j) for j in jobs]
    results = []
    for j, (i, arch) in enumerate(trained):
        per_fold = fold_metrics[j * folds : (j + 1) * folds]
        results.append((arch, float(np.mean(per_fold))))
    return GridSearchResult(
        results=results, skipped=skipped, grid_total=len(grid), folds=folds
    )


# ---------------------------------------------------------------------------
# Feature importance via input Jacobians.


@dataclass
class ImportanceMatrix:
    matrix: np.ndarray            # (n_features, n_dimensions), rows in [-1, 1]
    feature_names: list[str]
    dimensions: list[str]
    degenerate: list[bool] = field(default_factory=list)


def feature_importance(record, spec: CompilerSpec, observations) -> ImportanceMatrix:
    """Average analytic gradient of outputs w.r.t. inputs (scaled space),
    aggregated to PPA dimensions and normalized per input variable by its
    maximum absolute entry."""
    X, _ = ds.as_matrices(observations)
    Xs = ds.transform_x(record.scalers, X)
    J = nn.input_jacobian(record.network, Xs)      # (n, out, in)
    G = J.mean(axis=0)                             # (out, in)
    members = dimension_members(spec)
    col = {name: i for i, name in enumerate(record.variable_names)}
    dims = [d for d in PPA_DIMENSIONS if d in members]
    agg = np.stack([G[[col[v] for v in members[d]], :].mean(axis=0) for d in dims])
    matrix = agg.T.copy()                          # (in, dims)
    degenerate = []
    for r in range(matrix.shape[0]):
        peak = np.abs(matrix[r]).max()
        if peak > 0:
            matrix[r] /= peak
            degenerate.append(False)
        else:
            degenerate.append(True)
    return ImportanceMatrix(matrix, list(record.feature_names), dims, degenerate)


# ---------------------------------------------------------------------------
# Linear and polynomial least-squares baselines.

RIDGE = 1e-8


def _monomial_features(X: np.ndarray, degree: int) -> np.ndarray:
    n, d = X.shape
    cols = [np.ones(n)]
    for deg in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            col = np.ones(n)
            for i in combo:
                col = col * X[:, i]
            cols.append(col)
    return np.column_stack(cols)


def _ols_fit(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    AtA = A.T @ A + RIDGE * np.eye(A.shape[1])
    return np.linalg.solve(AtA, A.T @ B)


@dataclass
class BaselineResult:
    label: str
    mean_metric: float
    fold_metrics: list[float]
    report: ErrorReport  # pooled over fold test sets


def _baseline_cv(observations, spec, degree, folds, seed, val_fraction, label):
    splits = _cv_splits(observations, folds, seed, val_fraction)
    members = dimension_members(spec)
    variable_names = None
    fold_metrics = []
    blocks = []
    clamped = 0
    for train, _, test in splits:
        scalers = ds.fit_scalers(train)
        Xtr, Ytr = ds.as_matrices([ds.transform(scalers, o) for o in train])
        A = _monomial_features(Xtr, degree)
        w = _ols_fit(A, Ytr)
        Xte, Yte = ds.as_matrices(test)
        Ahat = _monomial_features(ds.transform_x(scalers, Xte), degree)
        Yhat, _ = ds.inverse_transform_y(scalers, Ahat @ w)
        errors, c = spb_matrix(Yhat, Yte)
        clamped += c
        blocks.append(errors)
        fold_metrics.append(float(np.nanmean(np.nanmedian(errors, axis=0))))
        if variable_names is None:
            from .synthcompiler import ppa_variable_names

            variable_names = ppa_variable_names(spec)
    report = report_from_errors(np.vstack(blocks), variable_names, members, clamped)
    return BaselineResult(label, float(np.mean(fold_metrics)), fold_metrics, report)


def baseline_linear(
    observations, spec: CompilerSpec, folds: int = 3, seed: int = 0,
    val_fraction: float = 1.0 / 9.0,
) -> BaselineResult:
    """Ordinary least squares (tiny ridge term) on the scaled data."""
    return _baseline_cv(observations, spec, 1, folds, seed, val_fraction, "linear")


def baseline_polynomial(
    observations, spec: CompilerSpec, degree: int = 2, folds: int = 3, seed: int = 0,
    val_fraction: float = 1.0 / 9.0,
) -> BaselineResult:
    """Least squares over all monomials of the scaled features up to
    ``degree`` (2 or 3)."""
    if degree not in (2, 3):
        raise SpecError("polynomial baseline supports degree 2 or 3")
    return _baseline_cv(observations, spec, degree, folds, seed, val_fraction, f"poly{degree}")
