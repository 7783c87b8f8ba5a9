"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 2 usage error (click), 3 unknown compiler/model or
missing file, 4 invalid request or parametrization, 5 runtime failure
(sampling exhausted, training diverged, format mismatch).
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import dataset as ds
from . import evalmetrics as em
from . import fixtures
from . import modelzoo as mz
from . import neuralnet as nn
from . import reliability as rel
from . import serialize
from .exceptions import (
    EmptySearchSpace,
    FormatVersionError,
    MemoptError,
    MetricUndefined,
    MissingModel,
    ModelNotFound,
    ParametrizationInvalid,
    SamplingExhausted,
    SpecError,
    TrainingDiverged,
)
from .optimizer import OptimizationRequest, optimize, verify_selection
from .paramspace import Parametrization, load_spec_dir
from .synthcompiler import CoefficientSet

EXIT_NOT_FOUND = 3
EXIT_INVALID = 4
EXIT_RUNTIME = 5


@dataclass
class RunConfig:
    spec_dir: str | None
    zoo_dir: str
    data_dir: str
    seed: int
    workers: int
    quality_target: float
    bind: str = "127.0.0.1:8765"

    def specs(self):
        if self.spec_dir:
            return load_spec_dir(self.spec_dir)
        return fixtures.builtin_specs()

    def spec(self, compiler_id, version):
        for s in self.specs():
            if s.compiler_id == compiler_id and s.version == version:
                return s
        raise ModelNotFound(f"no spec for {compiler_id}@{version}")

    def zoo(self) -> mz.Zoo:
        return mz.Zoo(self.zoo_dir)

    def dataset_path(self, compiler_id, version, kind="") -> Path:
        suffix = f".{kind}" if kind else ""
        return Path(self.data_dir) / f"{compiler_id}__{version}{suffix}.csv"


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ModelNotFound, MissingModel, FileNotFoundError) as exc:
            click.echo(f"error[not-found]: {exc}", err=True)
            sys.exit(EXIT_NOT_FOUND)
        except (SpecError, ParametrizationInvalid, EmptySearchSpace, MetricUndefined) as exc:
            click.echo(f"error[invalid]: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except (SamplingExhausted, TrainingDiverged, FormatVersionError, MemoptError) as exc:
            click.echo(f"error[runtime]: {exc}", err=True)
            sys.exit(EXIT_RUNTIME)

    return wrapper


def table(headers, rows) -> str:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*(str(c) for c in row)) for row in rows]
    return "\n".join(lines)


def emit(cfg_json: bool, payload: dict, text: str):
    click.echo(json.dumps(payload, indent=2) if cfg_json else text)


@click.group()
@click.option("--spec-dir", envvar="MEMOPT_SPEC_DIR", default=None,
              help="Directory of compiler spec files (default: builtin fixtures).")
@click.option("--zoo-dir", envvar="MEMOPT_ZOO_DIR", default="memopt-zoo")
@click.option("--data-dir", envvar="MEMOPT_DATA_DIR", default="memopt-data")
@click.option("--seed", envvar="MEMOPT_SEED", default=0, type=int)
@click.option("--workers", envvar="MEMOPT_WORKERS", default=20, type=int)
@click.option("--quality-target", default=mz.DEFAULT_QUALITY_TARGET, type=float,
              help="Median SPB %% per dimension considered good enough.")
@click.pass_context
def main(ctx, spec_dir, zoo_dir, data_dir, seed, workers, quality_target):
    """Surrogate-model toolkit for memory compiler PPA optimization."""
    if workers < 1:
        raise click.UsageError("--workers must be >= 1")
    ctx.obj = RunConfig(spec_dir, zoo_dir, data_dir, seed, workers, quality_target)


def _coeffs(cfg, spec) -> CoefficientSet:
    return CoefficientSet.generate(spec, cfg.seed)


@main.command("gen-data")
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("-n", "--count", default=500, type=int)
@click.option("--exclude", multiple=True, help="size range lo:hi (bits) to exclude")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def gen_data(cfg, compiler, version, count, exclude, as_json):
    """Sample parametrizations and compile ground truth into the data dir."""
    spec = cfg.spec(compiler, version)
    ranges = []
    for spec_str in exclude:
        lo, hi = spec_str.split(":")
        ranges.append((int(lo), int(hi)))
    params = ds.sample_parametrizations(spec, count, cfg.seed, ranges)
    observations = ds.build_observations(spec, _coeffs(cfg, spec), params, n_workers=cfg.workers)
    path = cfg.dataset_path(compiler, version)
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.save_dataset(spec, observations, path)
    payload = {"written": str(path), "observations": len(observations)}
    emit(as_json, payload, f"wrote {len(observations)} observations to {path}")


def _load_observations(cfg, spec, kind=""):
    path = cfg.dataset_path(spec.compiler_id, spec.version, kind)
    if not path.exists():
        raise FileNotFoundError(f"dataset {path} not found (run gen-data/train first)")
    return ds.load_dataset(spec, path)


def _arch_options(fn):
    fn = click.option("--hidden-layers", default=2, type=int)(fn)
    fn = click.option("--multiplier", default=8, type=int)(fn)
    fn = click.option("--hidden-act", default="sigmoid",
                      type=click.Choice(["sigmoid", "tanh", "relu"]))(fn)
    fn = click.option("--output-act", default="none",
                      type=click.Choice(["none", "relu_shifted"]))(fn)
    fn = click.option("--max-epochs", default=50_000, type=int)(fn)
    return fn


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@_arch_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def train(cfg, compiler, version, hidden_layers, multiplier, hidden_act, output_act,
          max_epochs, as_json):
    """Train a model on the generated dataset and store it in the zoo."""
    spec = cfg.spec(compiler, version)
    observations = _load_observations(cfg, spec)
    arch = nn.Architecture(hidden_layers, multiplier, hidden_act, output_act)
    config = nn.TrainConfig(max_epochs=max_epochs, rng_seed=cfg.seed)
    record, parts, log = mz.train_on_observations(
        spec, observations, arch, config, split_seed=cfg.seed, init_seed=cfg.seed + 1
    )
    report = em.error_report(record, spec, parts.test)
    record.metadata["per_dimension_error"] = report.per_dimension
    record.freeze()
    path = cfg.zoo().save(record)
    test_path = cfg.dataset_path(compiler, version, "test")
    ds.save_dataset(spec, parts.test, test_path)
    payload = {
        "model": str(path),
        "stopped_epoch": log.stopped_epoch,
        "stop_reason": log.stop_reason,
        "per_dimension_error": report.per_dimension,
        "test_set": str(test_path),
    }
    emit(as_json, payload, table(
        ["dimension", "median SPB %"],
        [(d, f"{v:.3f}") for d, v in report.per_dimension.items()],
    ) + f"\nmodel: {path}\nstopped at epoch {log.stopped_epoch} ({log.stop_reason})")


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--batch-size", default=500, type=int)
@click.option("--max-observations", default=6000, type=int)
@click.option("--max-epochs", default=50_000, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def build(cfg, compiler, version, batch_size, max_observations, max_epochs, as_json):
    """Iteratively generate data and retrain until the quality target."""
    spec = cfg.spec(compiler, version)
    record, log = mz.iterative_build(
        spec, _coeffs(cfg, spec),
        quality_target=cfg.quality_target,
        batch_size=batch_size,
        max_observations=max_observations,
        master_seed=cfg.seed,
        config=nn.TrainConfig(max_epochs=max_epochs),
        n_workers=cfg.workers,
    )
    path = cfg.zoo().save(record)
    rows = [
        (it["iteration"], it["batch_kept"], it["total_observations"],
         f"{max(it['per_dimension_error'].values()):.3f}")
        for it in log.iterations
    ]
    payload = {"model": str(path), "below_target": log.below_target,
               "reason": log.reason, "iterations": log.iterations}
    emit(as_json, payload, table(
        ["iter", "batch", "total", "worst dim SPB %"], rows
    ) + f"\nmodel: {path} ({log.reason})")


def _box_line(name, st, scale):
    if st["n"] == 0:
        return f"{name:>12}  (empty)"
    w = 46
    pos = lambda v: int(min(v / scale, 1.0) * (w - 1))
    line = [" "] * w
    for a, b, ch in ((st["whisker_lo"], st["q1"], "-"), (st["q3"], st["whisker_hi"], "-")):
        for i in range(pos(a), pos(b) + 1):
            line[i] = ch
    for i in range(pos(st["q1"]), pos(st["q3"]) + 1):
        line[i] = "="
    line[pos(st["median"])] = "|"
    return f"{name:>12}  [{''.join(line)}]  med {st['median']:.2f}%"


@main.command("eval")
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def eval_cmd(cfg, compiler, version, as_json):
    """Error report of a stored model on its stored test set."""
    spec = cfg.spec(compiler, version)
    record = cfg.zoo().get(compiler, version)
    test = _load_observations(cfg, spec, "test")
    report = em.error_report(record, spec, test)
    payload = {
        "per_dimension": report.per_dimension,
        "per_variable_median": report.per_variable_median,
        "overall": report.overall,
        "box_stats": report.box_stats,
        "clamped_count": report.clamped_count,
        "n_observations": report.n_observations,
    }
    scale = max(st["whisker_hi"] for st in report.box_stats.values() if st["n"]) or 1.0
    boxes = "\n".join(
        _box_line(dim, st, scale) for dim, st in report.box_stats.items()
    )
    emit(as_json, payload, table(
        ["dimension", "median SPB %"],
        [(d, f"{v:.3f}") for d, v in report.per_dimension.items()],
    ) + f"\noverall {report.overall:.3f}%  ({report.n_observations} test observations)\n" + boxes)


@main.command("size-report")
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--bins", default=10, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def size_report(cfg, compiler, version, bins, as_json):
    """Per-size-bin error report (drives data-generation exclusions)."""
    spec = cfg.spec(compiler, version)
    record = cfg.zoo().get(compiler, version)
    test = _load_observations(cfg, spec, "test")
    report = em.size_bin_report(record, spec, test, n_bins=bins)
    payload = {"bins": report.bins, "edges": report.edges, "n_total": report.n_total}
    emit(as_json, payload, table(
        ["size lo (bits)", "size hi", "SPB %", "count"],
        [(f"{b['lo']:.0f}", f"{b['hi']:.0f}", f"{b['error']:.3f}", b["count"]) for b in report.bins],
    ))


@main.command("grid-search")
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--max-epochs", default=600, type=int)
@click.option("--folds", default=3, type=int)
@click.option("--top", default=10, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def grid_search_cmd(cfg, compiler, version, max_epochs, folds, top, as_json):
    """Architecture grid search with k-fold cross-validation."""
    spec = cfg.spec(compiler, version)
    observations = _load_observations(cfg, spec)
    config = nn.TrainConfig(max_epochs=max_epochs)
    result = em.grid_search(observations, folds=folds, seed=cfg.seed,
                            config=config, n_workers=cfg.workers)
    ranked = sorted(result.results, key=lambda r: r[1])
    payload = {
        "grid_total": result.grid_total,
        "trained": len(result.results),
        "skipped": [dataclasses.asdict(a) for a in result.skipped],
        "results": [
            {"architecture": dataclasses.asdict(a), "error": e} for a, e in ranked
        ],
    }
    emit(as_json, payload, table(
        ["architecture", "CV SPB %"],
        [(a.label(), f"{e:.3f}") for a, e in ranked[:top]],
    ) + f"\n{len(result.results)} trained + {len(result.skipped)} skipped "
        f"of {result.grid_total} grid architectures")


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def importance(cfg, compiler, version, as_json):
    """Feature importance from averaged input Jacobians."""
    spec = cfg.spec(compiler, version)
    record = cfg.zoo().get(compiler, version)
    observations = _load_observations(cfg, spec, "test")
    imp = em.feature_importance(record, spec, observations)
    payload = {
        "feature_names": imp.feature_names,
        "dimensions": imp.dimensions,
        "matrix": [[float(v) for v in row] for row in imp.matrix],
    }
    rows = [
        (name,) + tuple(f"{v:+.2f}" for v in row)
        for name, row in zip(imp.feature_names, imp.matrix)
    ]
    emit(as_json, payload, table(["input \\ dimension"] + list(imp.dimensions), rows))


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--degrees", default="2,3")
@click.option("--max-epochs", default=4000, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def baselines(cfg, compiler, version, degrees, max_epochs, as_json):
    """Compare the network against linear/polynomial regression (same CV)."""
    spec = cfg.spec(compiler, version)
    observations = _load_observations(cfg, spec)
    config = nn.TrainConfig(max_epochs=max_epochs)
    nn_mean, nn_folds = em.cross_validate_nn(
        observations, nn.Architecture(), seed=cfg.seed, config=config
    )
    rows = [("neural-net", nn_mean, nn_folds)]
    rows.append(("linear",) + _brief(em.baseline_linear(observations, spec, seed=cfg.seed)))
    for deg in (int(d) for d in degrees.split(",") if d):
        rows.append((f"poly{deg}",) + _brief(
            em.baseline_polynomial(observations, spec, degree=deg, seed=cfg.seed)))
    payload = {
        "results": [
            {"model": name, "mean": mean, "folds": folds} for name, mean, folds in rows
        ]
    }
    emit(as_json, payload, table(
        ["model", "mean CV SPB %"],
        [(name, f"{mean:.3f}") for name, mean, _ in rows],
    ))


def _brief(result: em.BaselineResult):
    return result.mean_metric, result.fold_metrics


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _request_options(fn):
    fn = click.option("--request-file", type=click.Path(exists=True),
                      help="JSON optimization request (overrides flags)")(fn)
    fn = click.option("--port-config", default="1rw")(fn)
    fn = click.option("--depth", type=int, default=None)(fn)
    fn = click.option("--width", type=int, default=None)(fn)
    fn = click.option("--fix", multiple=True, help="extra fixed parameter name=value")(fn)
    fn = click.option("--corner", default=None, help="corner name for every dimension")(fn)
    fn = click.option("--freq", type=float, default=None, help="frequency target in MHz")(fn)
    fn = click.option("--weights", default="1,1,1")(fn)
    fn = click.option("--dynamic-metric", default="read",
                      type=click.Choice(["read", "max_rw"]))(fn)
    return fn


def _build_request(cfg, request_file, port_config, depth, width, fix, corner, freq,
                   weights, dynamic_metric) -> OptimizationRequest:
    if request_file:
        return serialize.request_from_dict(json.loads(Path(request_file).read_text()))
    if depth is None or width is None:
        raise SpecError("either --request-file or both --depth and --width are required")
    fixed = {"word_depth": depth, "word_width": width}
    for pair in fix:
        name, _, value = pair.partition("=")
        fixed[name] = _parse_value(value)
    if corner is None:
        ports = [s for s in cfg.specs() if s.port_config == port_config]
        if not ports:
            raise EmptySearchSpace(f"no compiler with port config {port_config!r}")
        corner = ports[0].corner_names()[0]
    w = tuple(float(v) for v in weights.split(","))
    return OptimizationRequest(
        port_config=port_config,
        fixed=fixed,
        corner_selection={
            "dynamic_power": corner, "leakage": corner,
            "access_time": corner, "cycle_time": corner,
        },
        frequency_target_mhz=freq,
        weights=w,
        dynamic_metric=dynamic_metric,
    )


@main.command("optimize")
@_request_options
@click.option("--top", default=5, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def optimize_cmd(cfg, request_file, port_config, depth, width, fix, corner, freq,
                 weights, dynamic_metric, top, as_json):
    """Rank all legal solutions for fixed depth/width by predicted PPA."""
    request = _build_request(cfg, request_file, port_config, depth, width, fix,
                             corner, freq, weights, dynamic_metric)
    result = optimize(request, cfg.zoo(), cfg.specs())
    payload = serialize.results_to_dict(result)
    if as_json:
        emit(True, payload, "")
        return
    free_names = None
    blocks = []
    for dim, entries in result.rankings.items():
        rows = []
        for rank, e in enumerate(entries[:top], start=1):
            if free_names is None or True:
                free_names = [k for k in e.parametrization.values
                              if k not in request.fixed]
            desc = " ".join(
                f"{k}={e.parametrization.values[k]}" for k in sorted(free_names)
            )
            rows.append((rank, f"{e.parametrization.compiler_id}@{e.parametrization.version}",
                         desc, f"{e.value:.4g}"))
        blocks.append(f"== ranking: {dim} ==\n" + table(["#", "compiler", "free parameters", "value"], rows))
    d = result.diagnostics
    blocks.append(
        f"candidates {d['candidates_total']}, filtered {d['filtered_by_frequency']}, "
        f"results {d['results']}, elapsed {result.elapsed_seconds:.3f}s"
    )
    click.echo("\n\n".join(blocks))


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--param", multiple=True, help="name=value of the selected parametrization")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def verify(cfg, compiler, version, param, as_json):
    """Compile a selected parametrization and compare against prediction."""
    spec = cfg.spec(compiler, version)
    values = {}
    for pair in param:
        name, _, value = pair.partition("=")
        values[name] = _parse_value(value)
    p = Parametrization(compiler, version, values)
    record = cfg.zoo().get(compiler, version)
    report = verify_selection(p, spec, _coeffs(cfg, spec), record)
    payload = report
    emit(as_json, payload, table(
        ["variable", "predicted", "ground truth", "SPB %"],
        [
            (name, f"{report['prediction'][name]:.4g}",
             f"{report['ground_truth'][name]:.4g}", f"{v:.3f}")
            for name, v in report["per_variable"].items()
        ],
    ) + f"\nmedian {report['median']:.3f}%  max {report['max']:.3f}%")


@main.command("reliability")
@_request_options
@click.option("--dimension", default="area",
              type=click.Choice(["dynamic_power", "leakage", "area", "weighted_sum"]))
@click.option("--draws", default=1000, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def reliability_cmd(cfg, request_file, port_config, depth, width, fix, corner, freq,
                    weights, dynamic_metric, dimension, draws, as_json):
    """Decision-reliability score of one ranking of an optimize run."""
    request = _build_request(cfg, request_file, port_config, depth, width, fix,
                             corner, freq, weights, dynamic_metric)
    specs = cfg.specs()
    zoo = cfg.zoo()
    result = optimize(request, zoo, specs)
    test_sets = _test_sets(cfg, specs, zoo)
    report = rel.ranking_reliability(result, dimension, zoo, specs, test_sets,
                                     draws=draws, seed=cfg.seed)
    emit(as_json, report,
         f"{dimension}: decision reliability {report['score']*100:.1f}% "
         f"({draws} draws, kinds: {', '.join(report['distribution_kinds'])})")


def _test_sets(cfg, specs, zoo):
    out = {}
    for cid, ver in zoo.keys():
        path = cfg.dataset_path(cid, ver, "test")
        if path.exists():
            spec = next((s for s in specs if (s.compiler_id, s.version) == (cid, ver)), None)
            if spec is not None:
                out[(cid, ver)] = ds.load_dataset(spec, path)
    return out


@main.command()
@click.option("--port-config", default="1rw")
@click.option("--sizes", default=100, type=int)
@click.option("--draws", default=1000, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def survey(cfg, port_config, sizes, draws, as_json):
    """Decision-reliability survey across random memory sizes."""
    specs = cfg.specs()
    zoo = cfg.zoo()
    test_sets = _test_sets(cfg, specs, zoo)
    have_models = {k for k in zoo.keys()}
    applicable = [s for s in specs
                  if s.port_config == port_config and (s.compiler_id, s.version) in have_models
                  and (s.compiler_id, s.version) in test_sets]
    if not applicable:
        raise ModelNotFound(f"no trained models with test data for port {port_config!r}")
    report = rel.reliability_survey(zoo, applicable, test_sets, sizes, draws, cfg.seed,
                                    port_config=port_config)
    payload = report
    emit(as_json, payload, table(
        ["dimension", "mean", "95%-quantile", "minimum"],
        [
            (dim, f"{v['mean']*100:.1f}%", f"{v['q95']*100:.1f}%", f"{v['min']*100:.1f}%")
            for dim, v in report["dimensions"].items()
        ],
    ) + f"\n{sizes} optimizer runs, {draws} draws each")


@main.command()
@click.option("--compiler", required=True)
@click.option("--version", default="1.0")
@click.option("--counts", default="1,10,100,1000,10000,100000")
@click.option("--compare-backends", is_flag=True,
              help="Also time the training step on both kernel backends.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@handle_errors
def bench(cfg, compiler, version, counts, compare_backends, as_json):
    """Inference timing table (min over repeats) plus backend comparison."""
    spec = cfg.spec(compiler, version)
    record = cfg.zoo().get(compiler, version)
    sample_counts = tuple(int(c) for c in counts.split(","))
    rows = mz.throughput_bench(record, spec, sample_counts, rng_seed=cfg.seed)
    payload = {"inference": rows, "backend": nn.active_backend()}
    text = table(
        ["# samples", "time (s)", "scale factor"],
        [(r["samples"], f"{r['seconds']:.3e}", f"{r['scale_factor']:.2f}") for r in rows],
    )
    if compare_backends:
        payload["backends"] = _backend_bench(record)
        text += "\n\n" + table(
            ["backend", "train step (us)", "forward 1k (us)"],
            [
                (b["backend"], f"{b['step_us']:.1f}", f"{b['forward_us']:.1f}")
                for b in payload["backends"]
            ],
        )
    emit(as_json, payload, text)


def _backend_bench(record):
    import numpy as np

    from .neuralnet import backend as nb

    net = record.network
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (100, net.input_dim))
    Y = rng.uniform(-1, 1, (100, net.output_dim))
    X1k = rng.uniform(-1, 1, (1000, net.input_dim))
    out = []
    names = ["python"] + (["compiled"] if nb.compiled_available() else [])
    for name in names:
        Ws = [W.copy() for W in net.weights]
        bs = [b.copy() for b in net.biases]
        ha, oa = net._acts()
        trainer = nb.make_trainer(Ws, bs, ha, oa, 1e-3, 0.9, 0.999, 1e-8, backend=name)
        trainer.step(X, Y)
        n = 300
        t0 = time.perf_counter()
        for _ in range(n):
            trainer.step(X, Y)
        step_us = (time.perf_counter() - t0) / n * 1e6
        nb.forward(Ws, bs, ha, oa, X1k, backend=name)
        t0 = time.perf_counter()
        for _ in range(n):
            nb.forward(Ws, bs, ha, oa, X1k, backend=name)
        fwd_us = (time.perf_counter() - t0) / n * 1e6
        out.append({"backend": name, "step_us": step_us, "forward_us": fwd_us})
    return out


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8765, type=int)
@click.pass_obj
@handle_errors
def serve(cfg, host, port):
    """Serve the optimizer and zoo over HTTP for the planner UI."""
    import uvicorn

    from .service import create_app

    specs = cfg.specs()
    zoo = cfg.zoo()
    app = create_app(zoo, specs, _test_sets(cfg, specs, zoo))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
