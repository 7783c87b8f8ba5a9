"""Sampling, encoding, scaling and splitting of training data.

The scaling pipeline is, in order: square root (targets only), z-score
standardization, then min-max normalization into [-1, 1]. All statistics
come from the training set alone; test and inference inputs are never
clipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import SamplingExhausted, SpecError
from .paramspace import CompilerSpec, Parametrization, free_choices
from .synthcompiler import CoefficientSet, compile_batch, ppa_variable_names

RETRY_FACTOR = 1000  # rejection-sampling budget is RETRY_FACTOR * n draws


def feature_names(spec: CompilerSpec) -> list[str]:
    """Explanatory variable order: declared parameters, then derived size."""
    return list(spec.param_names) + ["size"]


@dataclass(frozen=True)
class Observation:
    """One supervised example: encoded inputs, targets in original units."""

    x: np.ndarray
    y: np.ndarray
    provenance: Parametrization

    @property
    def size_bits(self) -> int:
        return self.provenance.size_bits


@dataclass(frozen=True)
class ScalerSet:
    """Fitted scaling statistics for explanatory and target variables.

    Degenerate (zero-variance) variables standardize to 0 and are flagged;
    min/max are taken over the standardized values.
    """

    x_mean: np.ndarray
    x_std: np.ndarray
    x_min: np.ndarray
    x_max: np.ndarray
    y_sqrt: np.ndarray  # bool per target: sqrt applied before standardization
    y_mean: np.ndarray
    y_std: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray

    @property
    def x_degenerate(self) -> np.ndarray:
        return (self.x_std == 0) | (self.x_max <= self.x_min)

    @property
    def y_degenerate(self) -> np.ndarray:
        return (self.y_std == 0) | (self.y_max <= self.y_min)

    @property
    def n_features(self) -> int:
        return self.x_mean.shape[0]

    @property
    def n_targets(self) -> int:
        return self.y_mean.shape[0]


@dataclass(frozen=True)
class SplitDataset:
    train: list[Observation]
    validation: list[Observation]
    test: list[Observation]
    split_seed: int


def encode(spec: CompilerSpec, p: Parametrization) -> np.ndarray:
    """Ordinal encoding: depth/width raw, arch params as choice indices,
    plus the derived size = depth * width."""
    values = []
    for name in spec.param_names:
        if name in ("word_depth", "word_width"):
            values.append(float(p.values[name]))
        else:
            values.append(float(spec.param_def(name).index_of(p.values[name])))
    values.append(float(p.values["word_depth"] * p.values["word_width"]))
    return np.array(values, dtype=np.float64)


def sample_parametrizations(
    spec: CompilerSpec,
    n: int,
    rng_seed: int,
    exclude_size_ranges: list[tuple[int, int]] | None = None,
) -> list[Parametrization]:
    """Draw n legal parametrizations, each built by sequentially fixing
    depth, width, then every arch parameter uniformly among its currently
    valid choices. Sizes inside an excluded [lo, hi] bit range are
    rejected and resampled."""
    if n < 1:
        raise SpecError("sample size must be >= 1")
    exclude = [(float(lo), float(hi)) for lo, hi in (exclude_size_ranges or [])]
    rng = np.random.default_rng(rng_seed)
    out: list[Parametrization] = []
    budget = RETRY_FACTOR * n
    draws = 0
    while len(out) < n:
        if draws >= budget:
            raise SamplingExhausted(
                f"could not draw {n} parametrizations within {budget} attempts "
                f"(exclusions {exclude})"
            )
        draws += 1
        depth = int(rng.choice(spec.depth_values))
        width = int(rng.choice(spec.width_values))
        if any(lo <= depth * width <= hi for lo, hi in exclude):
            continue
        values = {"word_depth": depth, "word_width": width}
        free = free_choices(spec, values)
        for pd in spec.arch_params:
            choices = free[pd.name]
            values[pd.name] = choices[int(rng.integers(len(choices)))]
        out.append(Parametrization(spec.compiler_id, spec.version, values))
    return out


def build_observations(
    spec: CompilerSpec,
    coeffs: CoefficientSet,
    parametrizations: list[Parametrization],
    simulated_latency: float | None = None,
    n_workers: int = 20,
) -> list[Observation]:
    """Compile ground truth for each parametrization and encode it."""
    records = compile_batch(spec, coeffs, parametrizations, simulated_latency, n_workers)
    return [
        Observation(encode(spec, p), rec.to_vector(spec), p)
        for p, rec in zip(parametrizations, records)
    ]


def _standardize_fit(matrix: np.ndarray):
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    z = np.where(std > 0, (matrix - mean) / np.where(std > 0, std, 1.0), 0.0)
    return mean, std, z.min(axis=0), z.max(axis=0)


def fit_scalers(train: list[Observation]) -> ScalerSet:
    if not train:
        raise SpecError("cannot fit scalers on an empty training set")
    X = np.stack([o.x for o in train])
    Y = np.stack([o.y for o in train])
    if np.any(Y < 0):
        raise SpecError("targets must be non-negative for the sqrt transform")
    x_mean, x_std, x_min, x_max = _standardize_fit(X)
    y_mean, y_std, y_min, y_max = _standardize_fit(np.sqrt(Y))
    return ScalerSet(
        x_mean=x_mean,
        x_std=x_std,
        x_min=x_min,
        x_max=x_max,
        y_sqrt=np.ones(Y.shape[1], dtype=bool),
        y_mean=y_mean,
        y_std=y_std,
        y_min=y_min,
        y_max=y_max,
    )


def _apply(values, mean, std, vmin, vmax):
    z = np.where(std > 0, (values - mean) / np.where(std > 0, std, 1.0), 0.0)
    span = vmax - vmin
    safe_span = np.where(span > 0, span, 1.0)
    return np.where(span > 0, -1.0 + 2.0 * (z - vmin) / safe_span, 0.0)


def transform_x(scalers: ScalerSet, X: np.ndarray) -> np.ndarray:
    return _apply(np.asarray(X, dtype=np.float64), scalers.x_mean, scalers.x_std, scalers.x_min, scalers.x_max)


def transform_y(scalers: ScalerSet, Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    return _apply(np.where(scalers.y_sqrt, np.sqrt(Y), Y), scalers.y_mean, scalers.y_std, scalers.y_min, scalers.y_max)


def inverse_transform_y(scalers: ScalerSet, Y_scaled: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Back to original units. Returns (values, clamped_mask): entries whose
    de-standardized sqrt-value is negative clamp to 0 and are flagged.

    Values within float rounding noise of 0 snap to an exact 0 (the y = 0
    boundary round-trips exactly instead of yielding ~1e-32).
    """
    Y_scaled = np.asarray(Y_scaled, dtype=np.float64)
    span = scalers.y_max - scalers.y_min
    z = np.where(span > 0, (Y_scaled + 1.0) / 2.0 * span + scalers.y_min, 0.0)
    v = z * scalers.y_std + scalers.y_mean
    noise = 1e-12 * np.maximum(np.abs(scalers.y_mean), scalers.y_std)
    v = np.where(np.abs(v) <= noise, 0.0, v)
    clamped = (v < 0) & np.asarray(scalers.y_sqrt)
    v = np.where(clamped, 0.0, v)
    return np.where(scalers.y_sqrt, v * v, v), clamped


def transform(scalers: ScalerSet, obs: Observation) -> Observation:
    return Observation(
        transform_x(scalers, obs.x), transform_y(scalers, obs.y), obs.provenance
    )


def split(observations: list[Observation], seed: int) -> SplitDataset:
    """Random split: train = floor(2n/3); of the remainder, validation =
    floor(1/3) and test takes the rest (so test is about twice validation)."""
    n = len(observations)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = (2 * n) // 3
    remainder = n - n_train
    n_val = remainder // 3
    train_idx = perm[:n_train]
    val_idx = perm[n_train : n_train + n_val]
    test_idx = perm[n_train + n_val :]
    pick = lambda idx: [observations[i] for i in idx]
    return SplitDataset(pick(train_idx), pick(val_idx), pick(test_idx), seed)


def as_matrices(observations: list[Observation]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([o.x for o in observations]) if observations else np.empty((0, 0))
    Y = np.stack([o.y for o in observations]) if observations else np.empty((0, 0))
    return X, Y


# ---------------------------------------------------------------------------
# Tabular persistence: one row per parametrization, parameter columns then
# corner-qualified PPA columns.


def dataset_header(spec: CompilerSpec) -> list[str]:
    return list(spec.param_names) + ppa_variable_names(spec)


def save_dataset(spec: CompilerSpec, observations: list[Observation], path) -> None:
    header = dataset_header(spec)
    lines = [",".join(header)]
    for obs in observations:
        row = [str(obs.provenance.values[n]) for n in spec.param_names]
        row += [repr(float(v)) for v in obs.y]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_param(spec: CompilerSpec, name: str, cell: str):
    if name in ("word_depth", "word_width"):
        return int(cell)
    for choice in spec.param_def(name).choices:
        if str(choice) == cell:
            return choice
    raise SpecError(f"cell {cell!r} is not a choice of {name!r}")


def load_dataset(spec: CompilerSpec, path) -> list[Observation]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    expected = dataset_header(spec)
    if header != expected:
        raise SpecError(f"dataset header mismatch for {spec.compiler_id}: {header[:4]}...")
    n_params = len(spec.param_names)
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        values = {
            name: _parse_param(spec, name, cell)
            for name, cell in zip(spec.param_names, cells[:n_params])
        }
        p = Parametrization(spec.compiler_id, spec.version, values)
        y = np.array([float(c) for c in cells[n_params:]], dtype=np.float64)
        out.append(Observation(encode(spec, p), y, p))
    return out
