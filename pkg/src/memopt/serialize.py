"""One JSON schema for optimizer requests/results, shared by CLI and
service so any request valid in one is valid in the other."""

from __future__ import annotations

from .exceptions import SpecError
from .optimizer import OptimizationRequest, RankedEntry, RankedResults
from .paramspace import Parametrization

SCHEMA_VERSION = 1


def request_to_dict(request: OptimizationRequest) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "port_config": request.port_config,
        "fixed": dict(request.fixed),
        "corner_selection": dict(request.corner_selection),
        "frequency_target_mhz": request.frequency_target_mhz,
        "weights": list(request.weights),
        "dynamic_metric": request.dynamic_metric,
    }


def request_from_dict(doc: dict) -> OptimizationRequest:
    try:
        return OptimizationRequest(
            port_config=doc["port_config"],
            fixed=dict(doc["fixed"]),
            corner_selection=dict(doc["corner_selection"]),
            frequency_target_mhz=doc.get("frequency_target_mhz"),
            weights=tuple(doc.get("weights", (1.0, 1.0, 1.0))),
            dynamic_metric=doc.get("dynamic_metric", "read"),
        )
    except KeyError as exc:
        raise SpecError(f"optimization request missing field {exc}") from None


def parametrization_to_dict(p: Parametrization) -> dict:
    return {"compiler_id": p.compiler_id, "version": p.version, "values": dict(p.values)}


def entry_to_dict(entry: RankedEntry) -> dict:
    return {
        "parametrization": parametrization_to_dict(entry.parametrization),
        "ppa": dict(entry.ppa.values),
        "value": entry.value,
    }


def results_to_dict(results: RankedResults) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "rankings": {
            dim: [entry_to_dict(e) for e in entries]
            for dim, entries in results.rankings.items()
        },
        "diagnostics": results.diagnostics,
        "elapsed_seconds": results.elapsed_seconds,
    }
    if results.dimension_scalers is not None:
        doc["dimension_scalers"] = {
            "mean": dict(results.dimension_scalers.mean),
            "std": dict(results.dimension_scalers.std),
            "provenance": list(results.dimension_scalers.provenance),
        }
    return doc
