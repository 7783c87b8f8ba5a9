"""Regenerate the frozen golden files under tests/golden/.

Each golden is produced by an independent route from the code it checks:
the PPA record is evaluated with straight-line arithmetic written here
(not by synthcompiler.compile), the Shapiro-Wilk numbers come from
scipy.stats.shapiro, and the frozen model predictions are produced with
the pure-python kernel backend pinned.

Run from the repo root: python scripts/make_goldens.py
"""

import json
import math
from pathlib import Path

import numpy as np

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def golden_ppa():
    """Evaluate the documented output formulas step by step for one fixed
    parametrization of the alpha fixture, independently of the compiler
    implementation."""
    from memopt.fixtures import make_alpha
    from memopt.paramspace import Parametrization
    from memopt.synthcompiler import CoefficientSet

    spec = make_alpha()
    coeffs = CoefficientSet.generate(spec)
    a = coeffs.alpha
    p = Parametrization("alpha", "1.0", {
        "word_depth": 1024, "word_width": 32, "dual_rail": 1,
        "banks": 2, "column_mux": 8, "periphery_vt": "standard",
        "redundancy": "row",
    })

    depth, width = 1024, 32
    bits = depth * width
    banks, mux = 2.0, 8.0
    vt_idx = 1    # standard
    red_idx = 1   # row
    dual_frac = 1.0  # dual_rail index 1 of choices (0, 1)
    eta_area, eta_power = coeffs.extra_effects["dual_rail"]
    extra_area = 1.0 + eta_area * dual_frac
    extra_power = 1.0 + eta_power * dual_frac

    area = (a["a0"]
            + a["a1"] * bits * (1.0 + a["a_red"] * red_idx)
            + a["a2"] * banks * math.sqrt(bits)
            + a["a3"] * width * mux) * extra_area
    access_base = (a["t0"] + a["t1"] * math.log2(depth / banks)
                   + a["t2"] * math.log2(width)) * coeffs.vt_delay_table[vt_idx]
    cycle_factor = a["c0"] + a["c1"] * mux / a["mux_max"]
    read_base = (a["p0"] + a["p1"] * width * math.sqrt(banks)
                 + a["p2"] * depth / mux) * extra_power
    leak_base = a["l0"] + a["l1"] * bits * coeffs.vt_leak_table[vt_idx]

    values = {"area": area}
    for corner in spec.corners:
        acc = access_base * corner.process_factor / corner.voltage_factor
        rd = read_base * corner.voltage_factor ** 2
        values[f"access_time@{corner.name}"] = acc
        values[f"cycle_time@{corner.name}"] = acc * cycle_factor
        values[f"read_power@{corner.name}"] = rd
        values[f"write_power@{corner.name}"] = rd * (1.0 + a["w"])
        values[f"leakage@{corner.name}"] = (
            leak_base * corner.process_factor ** a["l2"]
            * math.exp(a["l3"] * (corner.temperature_factor - 1.0))
        )
    doc = {"parametrization": p.values, "values": values}
    (GOLDEN / "ppa_alpha.json").write_text(json.dumps(doc, indent=2) + "\n")
    print("wrote ppa_alpha.json")


SW_FIXTURE = [
    0.139, 0.157, 0.175, 0.256, 0.344, 0.413, 0.503, 0.577, 0.614, 0.655,
    0.954, 1.392, 1.557, 1.648, 1.690, 1.994, 2.174, 2.206, 3.245, 3.510,
]


def golden_shapiro():
    from scipy import stats

    cases = {"fixture20": SW_FIXTURE}
    rng = np.random.default_rng(2024)
    cases["normal50"] = list(rng.normal(size=50))
    cases["uniform30"] = list(rng.uniform(size=30))
    out = {}
    for name, x in cases.items():
        res = stats.shapiro(np.array(x))
        out[name] = {"samples": list(map(float, x)),
                     "W": float(res.statistic), "p": float(res.pvalue)}
    (GOLDEN / "shapiro_wilk.json").write_text(json.dumps(out, indent=2) + "\n")
    print("wrote shapiro_wilk.json")


def golden_model():
    """A small frozen model trained with the python backend plus frozen
    predictions on fixed inputs."""
    from memopt import dataset as ds
    from memopt import modelzoo as mz
    from memopt import neuralnet as nn
    from memopt.fixtures import make_tiny
    from memopt.synthcompiler import CoefficientSet

    nn.set_backend("python")
    spec = make_tiny()
    coeffs = CoefficientSet.generate(spec)
    params = ds.sample_parametrizations(spec, 240, 5)
    obs = ds.build_observations(spec, coeffs, params, n_workers=1)
    record, parts, _ = mz.train_on_observations(
        spec, obs, nn.Architecture(), nn.TrainConfig(max_epochs=1200, rng_seed=9),
        split_seed=10, init_seed=11,
    )
    record.freeze()
    zoo_dir = GOLDEN / "zoo"
    zoo_dir.mkdir(exist_ok=True)
    mz.Zoo(zoo_dir).save(record)

    probe = ds.sample_parametrizations(spec, 32, 6)
    X = np.stack([ds.encode(spec, p) for p in probe])
    Y, _ = record.predict_matrix(X)
    doc = {
        "backend": "python",
        "inputs": [[float(v) for v in row] for row in X],
        "predictions": [[float(v) for v in row] for row in Y],
    }
    (GOLDEN / "golden_predictions.json").write_text(json.dumps(doc) + "\n")
    nn.set_backend("auto")
    print(f"wrote zoo/{mz.model_filename(*record.key())} and golden_predictions.json")


def docs_examples():
    """Golden request/response examples for docs/, produced against the
    frozen tiny model with the python backend pinned."""
    from memopt import modelzoo as mz
    from memopt import neuralnet as nn
    from memopt import serialize
    from memopt.fixtures import make_tiny
    from memopt.optimizer import optimize

    examples = GOLDEN.parent.parent / "docs" / "examples"
    examples.mkdir(parents=True, exist_ok=True)
    request = {
        "schema_version": 1,
        "port_config": "2rw",
        "fixed": {"word_depth": 128, "word_width": 16},
        "corner_selection": {"dynamic_power": "typ", "leakage": "typ",
                             "access_time": "typ", "cycle_time": "typ"},
        "frequency_target_mhz": None,
        "weights": [1.0, 1.0, 1.0],
        "dynamic_metric": "read",
    }
    (examples / "optimize-request.json").write_text(json.dumps(request, indent=2) + "\n")
    nn.set_backend("python")
    try:
        zoo = mz.Zoo(GOLDEN / "zoo")
        result = optimize(serialize.request_from_dict(request), zoo, [make_tiny()])
        doc = serialize.results_to_dict(result)
        doc["elapsed_seconds"] = 0.0  # frozen example: timing is not content
        (examples / "optimize-response.json").write_text(json.dumps(doc, indent=2) + "\n")
    finally:
        nn.set_backend("auto")
    reliability_request = {"request": request, "dimension": "area",
                           "draws": 1000, "seed": 0}
    (examples / "reliability-request.json").write_text(
        json.dumps(reliability_request, indent=2) + "\n")
    print("wrote docs/examples/*.json")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    golden_ppa()
    golden_shapiro()
    golden_model()
    docs_examples()
