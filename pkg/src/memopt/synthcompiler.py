"""Deterministic synthetic memory compiler used as the ground-truth oracle.

Produces PPA outputs for any legal parametrization of a compiler spec.
The functional skeleton mixes log, sqrt and multiplicative interactions
(periphery VT trades leakage against speed, banking trades area against
access time) and its coefficients are normalized against the spec's
parameter extremes so every legal parametrization stays inside the
documented output ranges. No physical accuracy is claimed.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import CoefficientMismatch, ParametrizationInvalid, SpecError
from .paramspace import CompilerSpec, Parametrization, validate

# Output ranges of a prototypical compiler (upper bounds, original units).
AREA_MAX = 1.0e5          # µm²
ACCESS_MAX = 2.0          # ns
CYCLE_MAX = 3.0           # ns
DYN_POWER_MAX = 30.0      # µA/MHz
LEAKAGE_MAX = 1.0e5       # µA

PPA_FAMILIES = ("access_time", "cycle_time", "read_power", "write_power", "leakage")
PPA_DIMENSIONS = ("area",) + PPA_FAMILIES

# Parameters with a built-in role in the PPA skeleton. Anything else gets a
# small seeded multiplicative effect on area and dynamic power.
CORE_PARAMS = ("banks", "column_mux", "periphery_vt", "redundancy")

DEFAULT_MASTER_SEED = 0


def ppa_variable_names(spec: CompilerSpec) -> list[str]:
    """Column order of the c*5+1 output variables: area, then per family
    one corner-qualified column per design corner."""
    names = ["area"]
    for family in PPA_FAMILIES:
        for corner in spec.corner_names():
            names.append(f"{family}@{corner}")
    return names


def dimension_members(spec: CompilerSpec) -> dict[str, list[str]]:
    """PPA dimension -> member variable names (area has one, others c)."""
    members = {"area": ["area"]}
    for family in PPA_FAMILIES:
        members[family] = [f"{family}@{c}" for c in spec.corner_names()]
    return members


@dataclass(frozen=True)
class PpaRecord:
    """PPA outputs of one parametrization; values keyed by variable name."""

    values: dict

    @property
    def area(self) -> float:
        return self.values["area"]

    def get(self, family: str, corner: str) -> float:
        return self.values[f"{family}@{corner}"]

    def to_vector(self, spec: CompilerSpec) -> np.ndarray:
        return np.array([self.values[n] for n in ppa_variable_names(spec)], dtype=np.float64)

    @classmethod
    def from_vector(cls, spec: CompilerSpec, vec) -> "PpaRecord":
        names = ppa_variable_names(spec)
        if len(vec) != len(names):
            raise SpecError(f"expected {len(names)} PPA variables, got {len(vec)}")
        return cls(dict(zip(names, (float(v) for v in vec))))

    def range_violations(self, spec: CompilerSpec) -> list[str]:
        """Empty list iff all invariants hold (positivity, documented ranges,
        cycle >= access per corner)."""
        out = []
        limits = {
            "area": AREA_MAX,
            "access_time": ACCESS_MAX,
            "cycle_time": CYCLE_MAX,
            "read_power": DYN_POWER_MAX,
            "write_power": DYN_POWER_MAX,
            "leakage": LEAKAGE_MAX,
        }
        for name, value in self.values.items():
            family = name.split("@")[0]
            if not value > 0:
                out.append(f"{name}={value} not strictly positive")
            if value > limits[family]:
                out.append(f"{name}={value} above {limits[family]}")
        for corner in spec.corner_names():
            if self.get("cycle_time", corner) < self.get("access_time", corner):
                out.append(f"cycle < access at corner {corner}")
        expected = spec.n_corners * 5 + 1
        if len(self.values) != expected:
            out.append(f"variable count {len(self.values)} != {expected}")
        return out


def _seed_sequence(compiler_id: str, version: str, master_seed: int) -> np.random.SeedSequence:
    digest = hashlib.sha256(f"{compiler_id}@{version}".encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(master_seed)] + words)


@dataclass(frozen=True)
class CoefficientSet:
    """Seeded behavioral coefficients for one compiler version.

    All monotonicity-controlling coefficients are strictly positive; the
    VT delay table is strictly increasing and the VT leakage table
    strictly decreasing.
    """

    compiler_id: str
    version: str
    master_seed: int
    alpha: dict
    vt_delay_table: tuple
    vt_leak_table: tuple
    extra_effects: dict  # param name -> (eta_area, eta_power)

    @classmethod
    def generate(
        cls, spec: CompilerSpec, master_seed: int = DEFAULT_MASTER_SEED
    ) -> "CoefficientSet":
        rng = np.random.default_rng(_seed_sequence(spec.compiler_id, spec.version, master_seed))
        u = lambda lo, hi: float(rng.uniform(lo, hi))

        depth_max = max(spec.depth_values)
        width_max = max(spec.width_values)
        bits_max = depth_max * width_max

        def numeric_choices(name, default):
            try:
                pd = spec.param_def(name)
            except SpecError:
                return [default]
            if not all(isinstance(v, (int, float)) for v in pd.choices):
                raise SpecError(f"{name} choices must be numeric for the synthetic compiler")
            return list(pd.choices)

        banks_max = max(numeric_choices("banks", 1))
        mux_choices = numeric_choices("column_mux", 1)
        mux_min, mux_max = min(mux_choices), max(mux_choices)

        try:
            n_vt = len(spec.param_def("periphery_vt").choices)
        except SpecError:
            n_vt = 1
        try:
            n_red = len(spec.param_def("redundancy").choices)
        except SpecError:
            n_red = 1

        # VT tables: delay strictly increasing, leakage strictly decreasing,
        # geometric spacing between the drawn end points.
        d_lo, d_hi = u(0.88, 0.92), u(1.10, 1.20)
        l_hi, l_lo = u(2.5, 3.5), u(0.35, 0.45)
        if n_vt == 1:
            vt_delay = (1.0,)
            vt_leak = (1.0,)
        else:
            steps = np.linspace(0.0, 1.0, n_vt)
            vt_delay = tuple(d_lo * (d_hi / d_lo) ** s for s in steps)
            vt_leak = tuple(l_hi * (l_lo / l_hi) ** s for s in steps)

        # Small seeded effects for parameters outside the core skeleton.
        extra = {}
        for pd in spec.arch_params:
            if pd.name not in CORE_PARAMS:
                extra[pd.name] = (u(0.02, 0.08), u(0.02, 0.08))
        extras_mult = 1.0
        for eta_a, eta_p in extra.values():
            extras_mult *= 1.0 + max(eta_a, eta_p)

        # Corner factor extremes of this spec, used for range budgeting.
        p_max = max(c.process_factor for c in spec.corners)
        v_max = max(c.voltage_factor for c in spec.corners)
        v_min = min(c.voltage_factor for c in spec.corners)
        t_max = max(c.temperature_factor for c in spec.corners)

        red_span = max(n_red - 1, 1)
        alpha = {}
        # Area: base + bits*(1 + ar*red_idx) + banks*sqrt(bits) + width*mux.
        alpha["a_red"] = u(0.05, 0.15)
        budget_area = AREA_MAX / extras_mult
        alpha["a0"] = u(0.001, 0.004) * budget_area
        alpha["a1"] = u(0.35, 0.55) * budget_area / (bits_max * (1 + alpha["a_red"] * red_span))
        alpha["a2"] = u(0.04, 0.10) * budget_area / (banks_max * math.sqrt(bits_max))
        alpha["a3"] = u(0.02, 0.06) * budget_area / (width_max * mux_max)

        # Access time: affine in log2(depth/banks) and log2(width), scaled
        # by the VT delay and the corner's process/voltage ratio.
        k_acc = max(vt_delay) * p_max / v_min
        alpha["t0"] = u(0.04, 0.08) * ACCESS_MAX / k_acc
        alpha["t1"] = u(0.28, 0.42) * ACCESS_MAX / (k_acc * math.log2(depth_max))
        alpha["t2"] = u(0.12, 0.20) * ACCESS_MAX / (k_acc * math.log2(width_max))

        # Cycle time: multiplicative margin over access, grows with mux.
        alpha["c0"] = u(1.05, 1.20)
        alpha["c1"] = u(0.05, 0.15)
        alpha["mux_max"] = float(mux_max)

        # Dynamic power; write power adds a fixed premium over read.
        alpha["w"] = u(0.05, 0.25)
        k_pow = v_max * v_max
        budget_read = (DYN_POWER_MAX / (1 + alpha["w"])) / extras_mult
        alpha["p0"] = u(0.015, 0.04) * budget_read / k_pow
        alpha["p1"] = u(0.25, 0.42) * budget_read / (k_pow * width_max * math.sqrt(banks_max))
        alpha["p2"] = u(0.15, 0.29) * budget_read / (k_pow * depth_max / mux_min)

        # Leakage: bits-dominated, VT-gated, with process/temperature stress.
        alpha["l2"] = u(1.0, 2.5)
        alpha["l3"] = u(0.8, 1.6)
        k_leak = p_max ** alpha["l2"] * math.exp(alpha["l3"] * (t_max - 1.0))
        alpha["l0"] = u(0.001, 0.003) * LEAKAGE_MAX / k_leak
        alpha["l1"] = u(0.35, 0.55) * LEAKAGE_MAX / (k_leak * bits_max * max(vt_leak))

        return cls(
            compiler_id=spec.compiler_id,
            version=spec.version,
            master_seed=int(master_seed),
            alpha=alpha,
            vt_delay_table=vt_delay,
            vt_leak_table=vt_leak,
            extra_effects=extra,
        )


def compile(spec: CompilerSpec, coeffs: CoefficientSet, p: Parametrization) -> PpaRecord:
    """Ground-truth PPA for one legal parametrization. Pure and deterministic."""
    if coeffs.compiler_id != spec.compiler_id or coeffs.version != spec.version:
        raise CoefficientMismatch(
            f"coefficients are for {coeffs.compiler_id}@{coeffs.version}, "
            f"spec is {spec.compiler_id}@{spec.version}"
        )
    ok, violations = validate(spec, p)
    if not ok:
        raise ParametrizationInvalid(
            f"illegal parametrization for {spec.compiler_id}: {violations}", violations
        )

    a = coeffs.alpha
    depth, width = p.depth, p.width
    bits = depth * width

    def ordinal(name, default=0):
        try:
            pd = spec.param_def(name)
        except SpecError:
            return default
        return pd.index_of(p.values[name])

    def numeric(name, default):
        try:
            pd = spec.param_def(name)
        except SpecError:
            return default
        return float(p.values[name])

    banks = numeric("banks", 1.0)
    mux = numeric("column_mux", 1.0)
    vt_idx = ordinal("periphery_vt")
    red_idx = ordinal("redundancy")
    vt_delay = coeffs.vt_delay_table[vt_idx]
    vt_leak = coeffs.vt_leak_table[vt_idx]

    extra_area = 1.0
    extra_power = 1.0
    for name, (eta_a, eta_p) in coeffs.extra_effects.items():
        pd = spec.param_def(name)
        frac = pd.index_of(p.values[name]) / max(len(pd.choices) - 1, 1)
        extra_area *= 1.0 + eta_a * frac
        extra_power *= 1.0 + eta_p * frac

    area = (
        a["a0"]
        + a["a1"] * bits * (1.0 + a["a_red"] * red_idx)
        + a["a2"] * banks * math.sqrt(bits)
        + a["a3"] * width * mux
    ) * extra_area

    access_base = (
        a["t0"] + a["t1"] * math.log2(depth / banks) + a["t2"] * math.log2(width)
    ) * vt_delay
    cycle_factor = a["c0"] + a["c1"] * mux / a["mux_max"]
    read_base = (
        a["p0"] + a["p1"] * width * math.sqrt(banks) + a["p2"] * depth / mux
    ) * extra_power
    leak_base = a["l0"] + a["l1"] * bits * vt_leak

    values = {"area": area}
    for corner in spec.corners:
        pk, vk, tk = corner.process_factor, corner.voltage_factor, corner.temperature_factor
        access = access_base * pk / vk
        read = read_base * vk * vk
        values[f"access_time@{corner.name}"] = access
        values[f"cycle_time@{corner.name}"] = access * cycle_factor
        values[f"read_power@{corner.name}"] = read
        values[f"write_power@{corner.name}"] = read * (1.0 + a["w"])
        values[f"leakage@{corner.name}"] = (
            leak_base * pk ** a["l2"] * math.exp(a["l3"] * (tk - 1.0))
        )
    return PpaRecord(values)


def compile_batch(
    spec: CompilerSpec,
    coeffs: CoefficientSet,
    parametrizations: list[Parametrization],
    simulated_latency: float | None = None,
    n_workers: int = 20,
) -> list[PpaRecord]:
    """Element-wise compile on a worker pool; output order matches input.

    ``simulated_latency`` (seconds per call) exercises the parallel
    data-generation path the way slow real compilers would.
    """

    def one(p: Parametrization) -> PpaRecord:
        if simulated_latency:
            time.sleep(simulated_latency)
        return compile(spec, coeffs, p)

    if not parametrizations:
        return []
    if n_workers <= 1 and not simulated_latency:
        return [one(p) for p in parametrizations]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(one, p) for p in parametrizations]
        results = []
        for i, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except Exception as exc:
                raise type(exc)(f"batch element {i}: {exc}") from exc
    return results
