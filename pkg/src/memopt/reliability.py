"""Decision-reliability estimation for optimizer rankings.

Prediction errors are modeled as signed log-accuracy ratios ln(yhat/y)
estimated from size-similar test observations. Each result's error
distribution is either a normal fit (when Shapiro-Wilk does not reject
normality at alpha = 0.05) or a Gaussian kernel density estimate with
Scott bandwidth. Rankings are resampled by applying drawn errors
multiplicatively and counting how often the original rank-1 survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import dataset as ds
from .exceptions import MemoptError, SpecError, StatTestInapplicable
from .modelzoo import Zoo
from .optimizer import OptimizationRequest, optimize
from .paramspace import CompilerSpec

MIN_NEIGHBOR_SAMPLES = 100
SHAPIRO_ALPHA = 0.05

SURVEY_DIMENSIONS = ("area", "leakage", "read_power", "write_power")

_STD_NORMAL = NormalDist()

# Royston (1995) AS R94 polynomial coefficients (ascending powers).
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)        # mean of z, 4 <= n <= 11
_C4 = (1.3822, -0.77857, 0.062767, -2.0322e-3)       # log sd of z, 4 <= n <= 11
_C5 = (-1.5861, -0.31082, -0.083751, 3.8915e-3)      # mean of z, n >= 12
_C6 = (-0.4803, -0.082676, 3.0302e-3)                # log sd of z, n >= 12
_G = (-2.273, 0.459)


def _poly(coeffs, x):
    return sum(c * x**i for i, c in enumerate(coeffs))


def shapiro_wilk(samples) -> tuple[float, float]:
    """Shapiro-Wilk normality test, Royston's AS R94 approximation.

    Returns (W, p). Valid for 3 <= n <= 5000 samples with non-zero range.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 3 or n > 5000:
        raise StatTestInapplicable(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if x[-1] - x[0] <= 0:
        raise StatTestInapplicable("Shapiro-Wilk undefined for zero-range samples")

    # expected normal order statistics (Blom scores) and the coefficients a
    m = np.array(
        [_STD_NORMAL.inv_cdf((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)]
    )
    ssq_m = float(m @ m)
    rsn = 1.0 / math.sqrt(n)
    a = m / math.sqrt(ssq_m)
    if n == 3:
        a = np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
    else:
        a_n = a[-1] + _poly(_C1, rsn)
        if n > 5:
            a_n1 = a[-2] + _poly(_C2, rsn)
            phi = (ssq_m - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (
                1 - 2 * a_n**2 - 2 * a_n1**2
            )
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[-2], a[1] = a_n1, -a_n1
        else:
            phi = (ssq_m - 2 * m[-1] ** 2) / (1 - 2 * a_n**2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
        a[-1], a[0] = a_n, -a_n

    xm = x - x.mean()
    w = float((a @ x) ** 2 / (xm @ xm))
    w = min(w, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, min(max(p, 0.0), 1.0)
    if w >= 1.0:
        return w, 1.0
    if n <= 11:
        gamma = _poly(_G, n)
        if gamma - math.log(1.0 - w) <= 0:
            return w, 1e-19
        y = -math.log(gamma - math.log(1.0 - w))
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        y = math.log(1.0 - w)
        ln_n = math.log(n)
        mu = _poly(_C5, ln_n)
        sigma = math.exp(_poly(_C6, ln_n))
    z = (y - mu) / sigma
    return w, float(1.0 - _STD_NORMAL.cdf(z))


@dataclass(frozen=True)
class ErrorDistribution:
    """Signed log-accuracy-ratio error model for one result."""

    kind: str                      # "normal" or "kde"
    mean: float
    std: float
    samples: tuple = ()
    bandwidth: float = 0.0
    n_source: int = 0
    low_confidence: bool = False
    shapiro: tuple | None = None   # (W, p) when the test ran
    source: str = ""

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal(size)
        if self.kind == "normal":
            return self.mean + self.std * z
        u = rng.random(size)
        picks = np.asarray(self.samples)[(u * len(self.samples)).astype(int)]
        return picks + self.bandwidth * z

    def scaled(self, factor: float) -> "ErrorDistribution":
        """Same distribution with its spread multiplied by ``factor``."""
        return ErrorDistribution(
            self.kind, self.mean, self.std * factor,
            tuple(self.mean + (s - self.mean) * factor for s in self.samples),
            self.bandwidth * factor, self.n_source, self.low_confidence,
            self.shapiro, self.source,
        )


def _neighbor_indices(sizes: np.ndarray, target: int, want: int) -> np.ndarray:
    same = np.flatnonzero(sizes == target)
    if same.size >= want:
        return same
    need = want - same.size
    larger = np.flatnonzero(sizes > target)
    smaller = np.flatnonzero(sizes < target)
    larger = larger[np.argsort(sizes[larger], kind="stable")]          # nearest first
    smaller = smaller[np.argsort(-sizes[smaller], kind="stable")]
    take_large = min(need - need // 2, larger.size)
    take_small = min(need // 2, smaller.size)
    # at range ends, backfill from whichever side still has samples
    missing = need - take_large - take_small
    if missing > 0:
        extra_small = min(missing, smaller.size - take_small)
        take_small += extra_small
        take_large += min(missing - extra_small, larger.size - take_large)
    return np.concatenate([same, larger[:take_large], smaller[:take_small]])


def estimate_error_distribution(
    record,
    spec: CompilerSpec,
    observations: list[ds.Observation],
    size_bits: int,
    variable: str,
    alpha: float = SHAPIRO_ALPHA,
    min_samples: int = MIN_NEIGHBOR_SAMPLES,
) -> ErrorDistribution:
    """Error distribution near a target size: same-size test observations
    first, then an even split of larger and smaller neighbors until at
    least ``min_samples`` are collected."""
    if not observations:
        raise SpecError("cannot estimate an error distribution without observations")
    X, Y = ds.as_matrices(observations)
    Yhat, _ = record.predict_matrix(X)
    col = record.variable_names.index(variable)
    yhat, y = Yhat[:, col], Y[:, col]
    valid = (yhat > 0) & (y > 0)
    sizes = np.array([o.size_bits for o in observations])[valid]
    s = np.log(yhat[valid] / y[valid])

    low_confidence = s.size < min_samples
    idx = (
        np.arange(s.size)
        if low_confidence
        else _neighbor_indices(sizes, size_bits, min_samples)
    )
    sel = s[idx]
    mean = float(sel.mean())
    std = float(sel.std(ddof=1)) if sel.size > 1 else 0.0
    source = f"{record.compiler_id}@{record.version}:{variable}@size={size_bits}"

    if sel.size < 3 or std == 0 or np.ptp(sel) == 0:
        return ErrorDistribution(
            "normal", mean, max(std, 0.0), n_source=int(sel.size),
            low_confidence=low_confidence, source=source,
        )
    w, p = shapiro_wilk(sel)
    if p >= alpha:
        return ErrorDistribution(
            "normal", mean, std, n_source=int(sel.size),
            low_confidence=low_confidence, shapiro=(w, p), source=source,
        )
    bandwidth = std * sel.size ** (-1.0 / 5.0)     # Scott's rule
    return ErrorDistribution(
        "kde", mean, std, samples=tuple(float(v) for v in sel),
        bandwidth=bandwidth, n_source=int(sel.size),
        low_confidence=low_confidence, shapiro=(w, p), source=source,
    )


def decision_reliability(
    ranked_values,
    distributions: list[ErrorDistribution],
    draws: int = 1000,
    seed: int = 0,
) -> float:
    """Proportion of resamples in which the first-ranked result stays
    first after every result's prediction is perturbed by its own error
    draw (applied multiplicatively: value * exp(error)).

    Draw d uses a sub-generator seeded from (seed, d); results sharing an
    ErrorDistribution object are sampled as one block per draw.
    """
    values = np.asarray(ranked_values, dtype=np.float64)
    if values.size == 0:
        raise MemoptError("cannot score an empty ranking")
    if len(distributions) != values.size:
        raise MemoptError("one error distribution per ranked result is required")
    if values.size == 1:
        return 1.0

    groups: dict[int, list[int]] = {}
    order: list[ErrorDistribution] = []
    for i, dist in enumerate(distributions):
        if id(dist) not in groups:
            groups[id(dist)] = []
            order.append(dist)
        groups[id(dist)].append(i)

    wins = 0
    errors = np.empty(values.size)
    for d in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence([seed, d]))
        for dist in order:
            idx = groups[id(dist)]
            errors[idx] = dist.sample(rng, len(idx))
        adjusted = values * np.exp(errors)
        if int(np.argmin(adjusted)) == 0:
            wins += 1
    return wins / draws


def _grouped_draw(rng, order, groups, out):
    for dist in order:
        idx = groups[id(dist)]
        out[idx] = dist.sample(rng, len(idx))


def ranking_reliability(
    result,
    dimension: str,
    zoo: Zoo,
    specs: list[CompilerSpec],
    test_sets: dict,
    draws: int = 1000,
    seed: int = 0,
) -> dict:
    """Decision reliability for one ranked list of an optimize result.

    The plain dimensions perturb their criterion variable directly; the
    weighted ranking perturbs dynamic power, leakage and area per result
    and recomputes the weighted sum each draw.
    """
    entries = result.rankings.get(dimension)
    if entries is None:
        raise SpecError(f"unknown ranking dimension {dimension!r}")
    if not entries:
        raise MemoptError("cannot score an empty ranking")
    corner_selection = result.diagnostics["corner_selection"]
    spec_by_key = {(s.compiler_id, s.version): s for s in specs}
    size_bits = entries[0].parametrization.size_bits
    cache: dict[tuple, ErrorDistribution] = {}

    def dist_for(p, variable):
        key = (p.compiler_id, p.version)
        ckey = (key, variable)
        if ckey not in cache:
            record = zoo.get(*key)
            if key not in test_sets:
                raise SpecError(f"no test set available for {key[0]}@{key[1]}")
            cache[ckey] = estimate_error_distribution(
                record, spec_by_key[key], test_sets[key], size_bits, variable
            )
        return cache[ckey]

    variables = {
        "dynamic_power": f"read_power@{corner_selection['dynamic_power']}",
        "leakage": f"leakage@{corner_selection['leakage']}",
        "area": "area",
    }
    if dimension != "weighted_sum":
        variable = variables[dimension]
        dists = [dist_for(e.parametrization, variable) for e in entries]
        score = decision_reliability(
            [e.value for e in entries], dists, draws=draws, seed=seed
        )
        kinds = sorted({d.kind for d in dists})
        return {"dimension": dimension, "score": score, "draws": draws,
                "distribution_kinds": kinds}

    # weighted: perturb the three underlying dimensions, recompute the sum
    scalers = result.dimension_scalers
    weights = result.diagnostics["weights"]
    raw = {
        dim: np.array([
            e.ppa.values[variables[dim]] for e in entries
        ])
        for dim in ("dynamic_power", "leakage", "area")
    }
    dist_lists = {
        dim: [dist_for(e.parametrization, variables[dim]) for e in entries]
        for dim in ("dynamic_power", "leakage", "area")
    }
    grouping = {}
    for dim, dists in dist_lists.items():
        groups: dict[int, list[int]] = {}
        order: list[ErrorDistribution] = []
        for i, dist in enumerate(dists):
            if id(dist) not in groups:
                groups[id(dist)] = []
                order.append(dist)
            groups[id(dist)].append(i)
        grouping[dim] = (order, {k: np.array(v) for k, v in groups.items()})
    n = len(entries)
    wins = 0
    errs = {dim: np.empty(n) for dim in raw}
    w_dyn, w_leak, w_area = weights
    for d in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence([seed, d]))
        for dim in ("dynamic_power", "leakage", "area"):
            order, groups = grouping[dim]
            _grouped_draw(rng, order, groups, errs[dim])
        adjusted = (
            w_dyn * (raw["dynamic_power"] * np.exp(errs["dynamic_power"]) - scalers.mean["dynamic_power"]) / scalers.std["dynamic_power"]
            + w_leak * (raw["leakage"] * np.exp(errs["leakage"]) - scalers.mean["leakage"]) / scalers.std["leakage"]
            + w_area * (raw["area"] * np.exp(errs["area"]) - scalers.mean["area"]) / scalers.std["area"]
        )
        if int(np.argmin(adjusted)) == 0:
            wins += 1
    kinds = sorted({d.kind for lst in dist_lists.values() for d in lst})
    return {"dimension": dimension, "score": wins / draws, "draws": draws,
            "distribution_kinds": kinds}


def reliability_survey(
    zoo: Zoo,
    specs: list[CompilerSpec],
    test_sets: dict,
    n_sizes: int,
    draws: int = 1000,
    seed: int = 0,
    port_config: str | None = None,
    corner: str | None = None,
) -> dict:
    """Decision-reliability scores over randomly sampled memory sizes.

    For every sampled (depth, width) pair, all legal solutions are
    predicted and ranked per dimension (area, leakage, read and write
    power); each ranking is scored by Monte Carlo resampling. Returns per
    dimension the mean, the 95% quantile and the minimum score.
    """
    port = port_config or specs[0].port_config
    applicable = [s for s in specs if s.port_config == port]
    if not applicable:
        raise SpecError(f"no spec with port config {port!r}")
    corner = corner or applicable[0].corner_names()[0]

    pairs = sorted({
        (d, w) for s in applicable for d in s.depth_values for w in s.width_values
    })
    rng = np.random.default_rng(seed)
    chosen = [pairs[i] for i in rng.integers(0, len(pairs), size=n_sizes)]

    spec_by_key = {(s.compiler_id, s.version): s for s in applicable}
    dist_cache: dict[tuple, ErrorDistribution] = {}

    def dist_for(key, variable, size_bits):
        ckey = (key, variable, size_bits)
        if ckey not in dist_cache:
            record = zoo.get(*key)
            dist_cache[ckey] = estimate_error_distribution(
                record, spec_by_key[key], test_sets[key], size_bits, variable
            )
        return dist_cache[ckey]

    scores: dict[str, list[float]] = {dim: [] for dim in SURVEY_DIMENSIONS}
    kinds_used = set()
    for run_index, (depth, width) in enumerate(chosen):
        request = OptimizationRequest(
            port_config=port,
            fixed={"word_depth": depth, "word_width": width},
            corner_selection={
                "dynamic_power": corner, "leakage": corner,
                "access_time": corner, "cycle_time": corner,
            },
        )
        result = optimize(request, zoo, applicable)
        candidates = result.candidates
        size_bits = depth * width
        for dim in SURVEY_DIMENSIONS:
            variable = "area" if dim == "area" else f"{dim}@{corner}"
            values = np.array([ppa.values[variable] for _, ppa in candidates])
            order = np.argsort(values, kind="stable")
            dists = [
                dist_for((candidates[i][0].compiler_id, candidates[i][0].version),
                         variable, size_bits)
                for i in order
            ]
            kinds_used.update(d.kind for d in dists)
            score = decision_reliability(
                values[order], dists, draws=draws,
                seed=int(np.random.SeedSequence([seed, 101, run_index, SURVEY_DIMENSIONS.index(dim)]).generate_state(1)[0]),
            )
            scores[dim].append(score)

    summary = {}
    for dim, vals in scores.items():
        arr = np.array(vals)
        summary[dim] = {
            "mean": float(arr.mean()),
            "q95": float(np.quantile(arr, 0.95)),
            "min": float(arr.min()),
            "n_runs": int(arr.size),
        }
    return {"dimensions": summary, "draws": draws, "kinds_used": sorted(kinds_used)}
