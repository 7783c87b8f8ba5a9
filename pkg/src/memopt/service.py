"""Read-only HTTP/JSON service over a loaded model zoo.

The zoo is loaded once at startup as immutable shared state; every
request handler is stateless, so concurrent optimize calls return
bit-identical results to serial execution. Training never happens over
HTTP.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, field_validator

from . import evalmetrics as em
from . import reliability as rel
from .exceptions import (
    EmptySearchSpace,
    MemoptError,
    MissingModel,
    ModelNotFound,
    SpecError,
)
from .modelzoo import Zoo
from .optimizer import OptimizationRequest, optimize
from .paramspace import CompilerSpec, spec_to_dict
from .serialize import SCHEMA_VERSION, results_to_dict

DIMENSIONS = ("dynamic_power", "leakage", "area", "weighted_sum")


class OptimizeBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    port_config: str
    fixed: dict
    corner_selection: dict[str, str]
    frequency_target_mhz: float | None = None
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    dynamic_metric: Literal["read", "max_rw"] = "read"

    @field_validator("weights")
    @classmethod
    def _weights_usable(cls, v):
        if any(w < 0 for w in v):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in v):
            raise ValueError("weights must not all be zero")
        return v

    @field_validator("fixed")
    @classmethod
    def _fixed_complete(cls, v):
        for name in ("word_depth", "word_width"):
            if name not in v:
                raise ValueError(f"fixed must include {name}")
        return v

    def to_request(self) -> OptimizationRequest:
        return OptimizationRequest(
            port_config=self.port_config,
            fixed=dict(self.fixed),
            corner_selection=dict(self.corner_selection),
            frequency_target_mhz=self.frequency_target_mhz,
            weights=tuple(self.weights),
            dynamic_metric=self.dynamic_metric,
        )


class ReliabilityBody(BaseModel):
    request: OptimizeBody
    dimension: Literal["dynamic_power", "leakage", "area", "weighted_sum"]
    draws: int = Field(default=1000, ge=1, le=100_000)
    seed: int = 0


def _client_error(exc: MemoptError) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def create_app(zoo: Zoo, specs: list[CompilerSpec], test_sets: dict | None = None) -> FastAPI:
    app = FastAPI(title="memopt service", version="1")
    # the planner UI may be served from a different origin; service is read-only
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    specs = list(specs)
    test_sets = dict(test_sets or {})
    spec_by_key = {(s.compiler_id, s.version): s for s in specs}

    @app.get("/api/compilers")
    def list_compilers():
        entries = []
        for cid, ver in zoo.keys():
            spec = spec_by_key.get((cid, ver))
            entries.append(
                {
                    "compiler_id": cid,
                    "version": ver,
                    "spec": spec_to_dict(spec) if spec else None,
                }
            )
        return {"schema_version": SCHEMA_VERSION, "compilers": entries}

    def _record_or_404(compiler_id: str, version: str):
        try:
            return zoo.get(compiler_id, version)
        except ModelNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/api/models/{compiler_id}/{version}/metrics")
    def model_metrics(compiler_id: str, version: str):
        record = _record_or_404(compiler_id, version)
        return {
            "schema_version": SCHEMA_VERSION,
            "compiler_id": compiler_id,
            "version": version,
            "architecture": {
                "hidden_layers": record.architecture.hidden_layers,
                "hidden_unit_multiplier": record.architecture.hidden_unit_multiplier,
                "hidden_activation": record.architecture.hidden_activation,
                "output_activation": record.architecture.output_activation,
            },
            "metadata": record.metadata,
        }

    @app.get("/api/models/{compiler_id}/{version}/importance")
    def model_importance(compiler_id: str, version: str):
        record = _record_or_404(compiler_id, version)
        key = (compiler_id, version)
        if key not in test_sets:
            raise HTTPException(status_code=404, detail=f"no dataset loaded for {key}")
        imp = em.feature_importance(record, spec_by_key[key], test_sets[key])
        return {
            "schema_version": SCHEMA_VERSION,
            "feature_names": imp.feature_names,
            "dimensions": imp.dimensions,
            "matrix": [[float(v) for v in row] for row in imp.matrix],
            "degenerate_rows": imp.degenerate,
        }

    @app.post("/api/optimize")
    def run_optimize(body: OptimizeBody):
        try:
            result = optimize(body.to_request(), zoo, specs)
        except (SpecError, EmptySearchSpace) as exc:
            raise _client_error(exc) from None
        except MissingModel as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return results_to_dict(result)

    @app.post("/api/reliability")
    def run_reliability(body: ReliabilityBody):
        try:
            result = optimize(body.request.to_request(), zoo, specs)
            report = rel.ranking_reliability(
                result, body.dimension, zoo, specs, test_sets,
                draws=body.draws, seed=body.seed,
            )
        except (SpecError, EmptySearchSpace, MemoptError) as exc:
            raise _client_error(exc) from None
        report["schema_version"] = SCHEMA_VERSION
        return report

    return app
