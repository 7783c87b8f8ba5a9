"""Compiler parameter spaces: validation, constrained choices, enumeration.

A compiler spec declares the discrete, ordinal choice sets of every input
parameter, the legal word depth/width values, the design corners, and
constraint rules that restrict a parameter's choices depending on the
fixed depth and width. All data is immutable; enumeration order is a pure
function of the spec, so downstream rankings can tie-break on it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import (
    CompilerNotApplicable,
    EmptySearchSpace,
    SpecError,
)

DEPTH_BOUNDS = (32, 32768)
WIDTH_BOUNDS = (8, 320)
MAX_CORNERS = 20
MAX_PARAMS_TOTAL = 10

# Word depth and word width: always present, always fixed by the caller.
SYSTEM_PARAMS = ("word_depth", "word_width")


@dataclass(frozen=True)
class ParamDef:
    """One discrete compiler input; choice order is the ordinal encoding order."""

    name: str
    choices: tuple

    def __post_init__(self):
        if not self.choices:
            raise SpecError(f"parameter {self.name!r} has no choices")
        if len(set(self.choices)) != len(self.choices):
            raise SpecError(f"parameter {self.name!r} has duplicate choices")

    def index_of(self, value) -> int:
        try:
            return self.choices.index(value)
        except ValueError:
            raise SpecError(
                f"value {value!r} is not a choice of parameter {self.name!r}"
            ) from None


@dataclass(frozen=True)
class CornerDef:
    """A (process, voltage, temperature) characterization point."""

    name: str
    process_factor: float
    voltage_factor: float
    temperature_factor: float

    def __post_init__(self):
        for f in (self.process_factor, self.voltage_factor, self.temperature_factor):
            if not f > 0:
                raise SpecError(f"corner {self.name!r} has non-positive factor {f}")


@dataclass(frozen=True)
class ConstraintRule:
    """Threshold predicate on depth/width that restricts one parameter.

    ``variable`` is "word_depth" or "word_width", ``op`` one of "<", "<=",
    ">", ">=". When the predicate holds, ``param`` may only take values
    from ``allowed_subset``.
    """

    param: str
    variable: str
    op: str
    threshold: int
    allowed_subset: tuple

    _OPS = {
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
    }

    def __post_init__(self):
        if self.variable not in SYSTEM_PARAMS:
            raise SpecError(f"constraint variable must be depth or width, got {self.variable!r}")
        if self.op not in self._OPS:
            raise SpecError(f"unknown constraint operator {self.op!r}")
        if not self.allowed_subset:
            raise SpecError(f"constraint on {self.param!r} allows no values")

    def triggers(self, depth: int, width: int) -> bool:
        value = depth if self.variable == "word_depth" else width
        return self._OPS[self.op](value, self.threshold)

    def describe(self) -> str:
        allowed = ", ".join(str(v) for v in self.allowed_subset)
        return f"{self.variable} {self.op} {self.threshold} => {self.param} in {{{allowed}}}"


@dataclass(frozen=True)
class Parametrization:
    """One concrete assignment of every compiler input parameter."""

    compiler_id: str
    version: str
    values: dict

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    @property
    def depth(self) -> int:
        return self.values["word_depth"]

    @property
    def width(self) -> int:
        return self.values["word_width"]

    @property
    def size_bits(self) -> int:
        return self.depth * self.width

    def key(self) -> tuple:
        return (self.compiler_id, self.version, tuple(sorted(self.values.items())))


@dataclass(frozen=True)
class CompilerSpec:
    """Parameter space and corner set of one compiler version."""

    compiler_id: str
    version: str
    port_config: str
    arch_params: tuple[ParamDef, ...]
    depth_values: tuple[int, ...]
    width_values: tuple[int, ...]
    corners: tuple[CornerDef, ...]
    constraint_rules: tuple[ConstraintRule, ...] = field(default_factory=tuple)

    def __post_init__(self):
        _check_value_list("depth_values", self.depth_values, DEPTH_BOUNDS)
        _check_value_list("width_values", self.width_values, WIDTH_BOUNDS)
        n_params = len(self.arch_params) + len(SYSTEM_PARAMS)
        if not 2 <= n_params <= MAX_PARAMS_TOTAL:
            raise SpecError(f"{self.compiler_id}: {n_params} parameters outside [2, {MAX_PARAMS_TOTAL}]")
        for p in self.arch_params:
            if p.name in SYSTEM_PARAMS:
                raise SpecError(f"arch parameter shadows system parameter {p.name!r}")
            if not 2 <= len(p.choices) <= 4:
                raise SpecError(f"parameter {p.name!r} must have 2-4 choices, has {len(p.choices)}")
        if not 1 <= len(self.corners) <= MAX_CORNERS:
            raise SpecError(f"{self.compiler_id}: corner count {len(self.corners)} outside [1, {MAX_CORNERS}]")
        names = [c.name for c in self.corners]
        if len(set(names)) != len(names):
            raise SpecError(f"{self.compiler_id}: duplicate corner names")
        by_name = {p.name: p for p in self.arch_params}
        for rule in self.constraint_rules:
            if rule.param not in by_name:
                raise SpecError(f"constraint references unknown parameter {rule.param!r}")
            choices = set(by_name[rule.param].choices)
            if not set(rule.allowed_subset) <= choices:
                raise SpecError(f"constraint subset for {rule.param!r} is not a subset of its choices")

    @property
    def param_names(self) -> tuple[str, ...]:
        """Declared parameter order: system params first, then arch params."""
        return SYSTEM_PARAMS + tuple(p.name for p in self.arch_params)

    @property
    def n_corners(self) -> int:
        return len(self.corners)

    def param_def(self, name: str) -> ParamDef:
        for p in self.arch_params:
            if p.name == name:
                return p
        raise SpecError(f"unknown parameter {name!r} for {self.compiler_id}")

    def corner_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.corners)

    def supports_size(self, depth: int, width: int) -> bool:
        return depth in self.depth_values and width in self.width_values


def _check_value_list(label, values, bounds):
    if not values:
        raise SpecError(f"{label} is empty")
    lo, hi = bounds
    if any(v < lo or v > hi for v in values):
        raise SpecError(f"{label} outside [{lo}, {hi}]")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise SpecError(f"{label} must be strictly increasing")


def validate(spec: CompilerSpec, p: Parametrization) -> tuple[bool, list[str]]:
    """Check a parametrization against the spec; returns (ok, violations).

    Structural problems (wrong compiler, unknown or missing parameter
    names) raise ``SpecError``; value-level failures are reported in the
    violation list instead.
    """
    if p.compiler_id != spec.compiler_id:
        raise SpecError(
            f"parametrization is for {p.compiler_id!r}, spec is {spec.compiler_id!r}"
        )
    declared = set(spec.param_names)
    present = set(p.values)
    missing = declared - present
    unknown = present - declared
    if missing:
        raise SpecError(f"missing parameters: {sorted(missing)}")
    if unknown:
        raise SpecError(f"unknown parameters: {sorted(unknown)}")

    violations = []
    if p.depth not in spec.depth_values:
        violations.append(f"word_depth={p.depth} not a legal depth value")
    if p.width not in spec.width_values:
        violations.append(f"word_width={p.width} not a legal width value")
    for pd in spec.arch_params:
        if p.values[pd.name] not in pd.choices:
            violations.append(f"{pd.name}={p.values[pd.name]!r} not in choices")
    for rule in spec.constraint_rules:
        if rule.triggers(p.depth, p.width) and p.values[rule.param] not in rule.allowed_subset:
            violations.append(
                f"{rule.param}={p.values[rule.param]!r} violates rule: {rule.describe()}"
            )
    return (not violations, violations)


def free_choices(spec: CompilerSpec, fixed: dict) -> dict:
    """Legal choice list per non-fixed parameter, under the fixed depth/width.

    ``fixed`` must contain word_depth and word_width. Raises
    ``CompilerNotApplicable`` when the fixed size is outside the spec's
    legal depth/width values, or a fixed value is not a legal choice.
    """
    for name in SYSTEM_PARAMS:
        if name not in fixed:
            raise SpecError(f"{name} must be fixed")
    unknown = set(fixed) - set(spec.param_names)
    if unknown:
        raise SpecError(f"unknown fixed parameters: {sorted(unknown)}")
    depth, width = fixed["word_depth"], fixed["word_width"]
    if not spec.supports_size(depth, width):
        raise CompilerNotApplicable(
            f"{spec.compiler_id} v{spec.version} does not support depth={depth}, width={width}"
        )

    def allowed(pd: ParamDef):
        values = list(pd.choices)
        for rule in spec.constraint_rules:
            if rule.param == pd.name and rule.triggers(depth, width):
                values = [v for v in values if v in rule.allowed_subset]
        return values

    out = {}
    for pd in spec.arch_params:
        values = allowed(pd)
        if not values:
            raise CompilerNotApplicable(
                f"{spec.compiler_id}: no legal value for {pd.name} at depth={depth}, width={width}"
            )
        if pd.name in fixed:
            if fixed[pd.name] not in values:
                raise CompilerNotApplicable(
                    f"{spec.compiler_id}: fixed {pd.name}={fixed[pd.name]!r} is not legal "
                    f"at depth={depth}, width={width}"
                )
            continue
        out[pd.name] = values
    return out


def enumerate_solutions(
    specs: list[CompilerSpec], fixed: dict
) -> tuple[list[Parametrization], dict]:
    """Exact Cartesian product of free choices, concatenated across specs.

    Order is deterministic: spec order, then lexicographic over choice
    indices of the free parameters in declared parameter order.
    Non-applicable specs are skipped and recorded in the diagnostics.
    """
    solutions: list[Parametrization] = []
    skipped: list[dict] = []
    per_spec: dict[str, int] = {}
    for spec in specs:
        try:
            free = free_choices(spec, fixed)
        except CompilerNotApplicable as exc:
            skipped.append({"compiler_id": spec.compiler_id, "version": spec.version, "reason": str(exc)})
            continue
        names = [n for n in spec.param_names if n in free]
        count = 0
        for combo in itertools.product(*(free[n] for n in names)):
            values = dict(fixed)
            values.update(zip(names, combo))
            solutions.append(Parametrization(spec.compiler_id, spec.version, values))
            count += 1
        per_spec[f"{spec.compiler_id}@{spec.version}"] = count
    if not per_spec:
        raise EmptySearchSpace(
            "no applicable compiler for fixed parameters "
            f"(skipped: {[s['compiler_id'] for s in skipped]})"
        )
    diagnostics = {"skipped": skipped, "per_spec_counts": per_spec, "total": len(solutions)}
    return solutions, diagnostics


# ---------------------------------------------------------------------------
# Spec files: one JSON document per compiler version.

SPEC_SCHEMA_VERSION = 1


def spec_to_dict(spec: CompilerSpec) -> dict:
    return {
        "schema_version": SPEC_SCHEMA_VERSION,
        "compiler_id": spec.compiler_id,
        "version": spec.version,
        "port_config": spec.port_config,
        "arch_params": [{"name": p.name, "choices": list(p.choices)} for p in spec.arch_params],
        "depth_values": list(spec.depth_values),
        "width_values": list(spec.width_values),
        "corners": [
            {
                "name": c.name,
                "process_factor": c.process_factor,
                "voltage_factor": c.voltage_factor,
                "temperature_factor": c.temperature_factor,
            }
            for c in spec.corners
        ],
        "constraint_rules": [
            {
                "param": r.param,
                "variable": r.variable,
                "op": r.op,
                "threshold": r.threshold,
                "allowed_subset": list(r.allowed_subset),
            }
            for r in spec.constraint_rules
        ],
    }


def spec_from_dict(doc: dict) -> CompilerSpec:
    try:
        if doc.get("schema_version", 1) != SPEC_SCHEMA_VERSION:
            raise SpecError(f"unsupported spec schema_version {doc.get('schema_version')}")
        return CompilerSpec(
            compiler_id=doc["compiler_id"],
            version=doc["version"],
            port_config=doc["port_config"],
            arch_params=tuple(
                ParamDef(p["name"], tuple(p["choices"])) for p in doc["arch_params"]
            ),
            depth_values=tuple(doc["depth_values"]),
            width_values=tuple(doc["width_values"]),
            corners=tuple(
                CornerDef(
                    c["name"],
                    c["process_factor"],
                    c["voltage_factor"],
                    c["temperature_factor"],
                )
                for c in doc["corners"]
            ),
            constraint_rules=tuple(
                ConstraintRule(
                    r["param"],
                    r["variable"],
                    r["op"],
                    r["threshold"],
                    tuple(r["allowed_subset"]),
                )
                for r in doc.get("constraint_rules", [])
            ),
        )
    except KeyError as exc:
        raise SpecError(f"spec document missing field {exc}") from None


def save_spec(spec: CompilerSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")


def load_spec(path) -> CompilerSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed spec file {path}: {exc}") from None
    return spec_from_dict(doc)


def load_spec_dir(directory) -> list[CompilerSpec]:
    """All specs in a directory, sorted by (compiler_id, version)."""
    specs = [load_spec(p) for p in sorted(Path(directory).glob("*.json"))]
    specs.sort(key=lambda s: (s.compiler_id, s.version))
    return specs
