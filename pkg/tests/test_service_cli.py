import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from memopt import cli as cli_mod
from memopt import serialize
from memopt.optimizer import OptimizationRequest, optimize
from memopt.service import create_app


def make_request_body(freq=None, weights=(1.0, 1.0, 1.0)):
    return {
        "port_config": "1rw",
        "fixed": {"word_depth": 1024, "word_width": 32, "dual_rail": 0},
        "corner_selection": {
            "dynamic_power": "typ", "leakage": "typ",
            "access_time": "typ", "cycle_time": "typ",
        },
        "frequency_target_mhz": freq,
        "weights": list(weights),
        "dynamic_metric": "read",
    }


@pytest.fixture(scope="module")
def client(zoo4):
    app = create_app(zoo4["zoo"], zoo4["specs"], zoo4["test_sets"])
    return TestClient(app)


class TestService:
    def test_list_compilers(self, client):
        body = client.get("/api/compilers").json()
        assert len(body["compilers"]) == 4
        ids = {c["compiler_id"] for c in body["compilers"]}
        assert ids == {"alpha", "beta", "gamma", "delta"}
        assert body["schema_version"] == serialize.SCHEMA_VERSION

    def test_metrics_endpoint(self, client):
        body = client.get("/api/models/alpha/1.0/metrics").json()
        assert body["architecture"]["hidden_layers"] == 2
        assert "y_raw_mean" in body["metadata"]

    def test_metrics_unknown_model_404(self, client):
        assert client.get("/api/models/nope/1.0/metrics").status_code == 404

    def test_optimize_matches_library(self, client, zoo4):
        response = client.post("/api/optimize", json=make_request_body())
        assert response.status_code == 200
        body = response.json()
        request = serialize.request_from_dict(make_request_body())
        expected = serialize.results_to_dict(optimize(request, zoo4["zoo"], zoo4["specs"]))
        for dim in expected["rankings"]:
            got = body["rankings"][dim]
            want = expected["rankings"][dim]
            assert [e["parametrization"] for e in got] == [e["parametrization"] for e in want]
            assert [e["value"] for e in got] == pytest.approx([e["value"] for e in want])

    def test_unattainable_frequency_is_success_with_diagnostics(self, client):
        response = client.post("/api/optimize", json=make_request_body(freq=1e9))
        assert response.status_code == 200
        body = response.json()
        assert all(len(v) == 0 for v in body["rankings"].values())
        assert body["diagnostics"]["filtered_by_frequency"] == body["diagnostics"]["candidates_total"]

    def test_all_zero_weights_field_error(self, client):
        response = client.post("/api/optimize", json=make_request_body(weights=(0, 0, 0)))
        assert response.status_code == 422
        detail = json.dumps(response.json())
        assert "weights" in detail

    def test_missing_depth_field_error(self, client):
        body = make_request_body()
        del body["fixed"]["word_depth"]
        response = client.post("/api/optimize", json=body)
        assert response.status_code == 422
        assert "word_depth" in json.dumps(response.json())

    def test_reliability_endpoint(self, client):
        response = client.post("/api/reliability", json={
            "request": make_request_body(), "dimension": "area",
            "draws": 100, "seed": 1,
        })
        assert response.status_code == 200
        body = response.json()
        assert 0.0 <= body["score"] <= 1.0
        assert body["draws"] == 100

    def test_importance_endpoint(self, client, zoo4):
        response = client.get("/api/models/alpha/1.0/importance")
        assert response.status_code == 200
        body = response.json()
        assert body["feature_names"][-1] == "size"
        matrix = np.array(body["matrix"])
        assert matrix.shape == (len(body["feature_names"]), len(body["dimensions"]))
        assert np.abs(matrix).max() <= 1.0 + 1e-9

    def test_concurrent_optimize_bit_identical(self, client):
        body = make_request_body()

        def canonical(text):
            doc = json.loads(text)
            doc.pop("elapsed_seconds", None)  # wall time varies, content must not
            return json.dumps(doc, sort_keys=True)

        serial = canonical(client.post("/api/optimize", json=body).text)
        with ThreadPoolExecutor(max_workers=16) as pool:
            results = list(pool.map(
                lambda _: canonical(client.post("/api/optimize", json=body).text),
                range(50),
            ))
        assert all(r == serial for r in results)


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    """A tiny end-to-end CLI workspace: gen-data + train on the tiny spec."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    base = [
        "--zoo-dir", str(root / "zoo"),
        "--data-dir", str(root / "data"),
        "--seed", "5",
        "--workers", "2",
    ]

    def run(*args, code=0):
        result = runner.invoke(cli_mod.main, base + list(args), catch_exceptions=False)
        assert result.exit_code == code, result.output
        return result

    run("gen-data", "--compiler", "tiny", "--version", "1.0", "-n", "240")
    run("train", "--compiler", "tiny", "--version", "1.0", "--max-epochs", "1200")
    return run


class TestCli:
    def test_eval_and_size_report(self, cli_env):
        out = cli_env("eval", "--compiler", "tiny", "--json").output
        payload = json.loads(out)
        assert set(payload["per_dimension"]) == {
            "area", "access_time", "cycle_time", "read_power", "write_power", "leakage",
        }
        out = cli_env("size-report", "--compiler", "tiny", "--json").output
        bins = json.loads(out)["bins"]
        assert bins and all(b["count"] > 0 for b in bins)

    def test_eval_renders_box_plot(self, cli_env):
        out = cli_env("eval", "--compiler", "tiny").output
        assert "med" in out and "[" in out

    def test_importance_table(self, cli_env):
        out = cli_env("importance", "--compiler", "tiny", "--json").output
        payload = json.loads(out)
        assert payload["feature_names"][-1] == "size"

    def test_optimize_renders_four_rankings(self, cli_env):
        out = cli_env("optimize", "--port-config", "2rw", "--depth", "128",
                      "--width", "16").output
        for dim in ("dynamic_power", "leakage", "area", "weighted_sum"):
            assert f"ranking: {dim}" in out

    def test_optimize_json_schema_matches_service(self, cli_env):
        out = cli_env("optimize", "--port-config", "2rw", "--depth", "128",
                      "--width", "16", "--json").output
        payload = json.loads(out)
        assert payload["schema_version"] == serialize.SCHEMA_VERSION
        assert set(payload["rankings"]) == {"dynamic_power", "leakage", "area", "weighted_sum"}
        assert payload["diagnostics"]["candidates_total"] == 6  # banks x vt at 128x16

    def test_verify_command(self, cli_env):
        out = cli_env(
            "verify", "--compiler", "tiny",
            "--param", "word_depth=128", "--param", "word_width=16",
            "--param", "banks=2", "--param", "periphery_vt=standard",
            "--json",
        ).output
        payload = json.loads(out)
        assert payload["median"] >= 0

    def test_reliability_command(self, cli_env):
        out = cli_env("reliability", "--port-config", "2rw", "--depth", "128",
                      "--width", "16", "--dimension", "area", "--draws", "100",
                      "--json").output
        payload = json.loads(out)
        assert 0 <= payload["score"] <= 1

    def test_survey_command(self, cli_env):
        out = cli_env("survey", "--port-config", "2rw", "--sizes", "2",
                      "--draws", "50", "--json").output
        payload = json.loads(out)
        assert set(payload["dimensions"]) == {"area", "leakage", "read_power", "write_power"}

    def test_bench_command(self, cli_env):
        out = cli_env("bench", "--compiler", "tiny", "--counts", "1,10,100",
                      "--compare-backends", "--json").output
        payload = json.loads(out)
        assert [r["samples"] for r in payload["inference"]] == [1, 10, 100]
        assert payload["backends"][0]["backend"] == "python"

    def test_unknown_compiler_exit_code(self, cli_env):
        cli_env("eval", "--compiler", "missing", code=3)

    def test_invalid_weights_exit_code(self, cli_env):
        cli_env("optimize", "--port-config", "2rw", "--depth", "128",
                "--width", "16", "--weights", "0,0,0", code=4)

    def test_gen_data_exclusion_flag(self, cli_env):
        out = cli_env("gen-data", "--compiler", "tiny", "-n", "30",
                      "--exclude", "0:2047", "--json").output
        assert json.loads(out)["observations"] == 30


class TestDocsExamples:
    """The committed schema examples stay in sync with the code."""

    def test_request_and_response_examples(self):
        from pathlib import Path

        from memopt import modelzoo as mz
        from memopt import neuralnet as nn
        from memopt.fixtures import make_tiny
        from conftest import GOLDEN_DIR

        examples = Path(__file__).parent.parent / "docs" / "examples"
        request_doc = json.loads((examples / "optimize-request.json").read_text())
        expected = json.loads((examples / "optimize-response.json").read_text())
        request = serialize.request_from_dict(request_doc)
        nn.set_backend("python")
        try:
            zoo = mz.Zoo(GOLDEN_DIR / "zoo")
            result = optimize(request, zoo, [make_tiny()])
        finally:
            nn.set_backend("auto")
        got = serialize.results_to_dict(result)
        got["elapsed_seconds"] = 0.0
        assert got == expected

    def test_reliability_request_example_parses(self):
        from pathlib import Path

        examples = Path(__file__).parent.parent / "docs" / "examples"
        doc = json.loads((examples / "reliability-request.json").read_text())
        req = serialize.request_from_dict(doc["request"])
        assert doc["dimension"] in ("dynamic_power", "leakage", "area", "weighted_sum")
        assert req.port_config == "2rw"
