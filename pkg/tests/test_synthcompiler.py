import dataclasses
import itertools
import time

import numpy as np
import pytest

from memopt import fixtures
from memopt import dataset as ds
from memopt.exceptions import CoefficientMismatch, ParametrizationInvalid
from memopt.paramspace import Parametrization, free_choices
from memopt.synthcompiler import (
    CoefficientSet,
    compile,
    compile_batch,
    dimension_members,
    ppa_variable_names,
)
from conftest import load_golden


def all_legal(spec):
    out = []
    for d in spec.depth_values:
        for w in spec.width_values:
            free = free_choices(spec, {"word_depth": d, "word_width": w})
            names = list(free)
            for combo in itertools.product(*(free[n] for n in names)):
                values = {"word_depth": d, "word_width": w, **dict(zip(names, combo))}
                out.append(Parametrization(spec.compiler_id, spec.version, values))
    return out


def fixture_param(**overrides):
    values = {
        "word_depth": 1024, "word_width": 32, "dual_rail": 0,
        "banks": 2, "column_mux": 8, "periphery_vt": "standard",
        "redundancy": "row",
    }
    values.update(overrides)
    return Parametrization("alpha", "1.0", values)


class TestCompile:
    def test_deterministic(self, alpha_spec, alpha_coeffs):
        p = fixture_param()
        a = compile(alpha_spec, alpha_coeffs, p)
        b = compile(alpha_spec, alpha_coeffs, p)
        assert a.values == b.values

    def test_golden_record(self, alpha_spec, alpha_coeffs):
        golden = load_golden("ppa_alpha.json")
        p = Parametrization("alpha", "1.0", golden["parametrization"])
        rec = compile(alpha_spec, alpha_coeffs, p)
        for name, expected in golden["values"].items():
            assert rec.values[name] == pytest.approx(expected, rel=1e-12)

    def test_vt_tradeoff(self, alpha_spec, alpha_coeffs):
        std = compile(alpha_spec, alpha_coeffs, fixture_param(periphery_vt="standard"))
        high = compile(alpha_spec, alpha_coeffs, fixture_param(periphery_vt="high"))
        for corner in alpha_spec.corner_names():
            assert high.get("leakage", corner) < std.get("leakage", corner)
            assert high.get("cycle_time", corner) > std.get("cycle_time", corner)
        assert high.area == std.area

    def test_banking_tradeoff(self, alpha_spec, alpha_coeffs):
        one = compile(alpha_spec, alpha_coeffs, fixture_param(banks=1))
        two = compile(alpha_spec, alpha_coeffs, fixture_param(banks=2))
        assert two.area > one.area
        for corner in alpha_spec.corner_names():
            assert two.get("access_time", corner) < one.get("access_time", corner)

    def test_invalid_parametrization_rejected(self, alpha_spec, alpha_coeffs):
        with pytest.raises(ParametrizationInvalid):
            compile(alpha_spec, alpha_coeffs, fixture_param(word_depth=33))

    def test_coefficient_mismatch(self, alpha_spec, tiny_coeffs):
        with pytest.raises(CoefficientMismatch):
            compile(alpha_spec, tiny_coeffs, fixture_param())

    def test_variable_count_formula(self, tiny_spec, tiny_coeffs):
        p = all_legal(tiny_spec)[0]
        rec = compile(tiny_spec, tiny_coeffs, p)
        assert len(rec.values) == tiny_spec.n_corners * 5 + 1

    def test_c15_gives_76_variables(self):
        spec = fixtures.make_alpha("2.0")
        assert spec.n_corners == 15
        assert len(ppa_variable_names(spec)) == 76
        coeffs = CoefficientSet.generate(spec)
        p = ds.sample_parametrizations(spec, 1, 3)[0]
        rec = compile(spec, coeffs, p)
        assert len(rec.values) == 76
        assert rec.range_violations(spec) == []


class TestRanges:
    def test_tiny_exhaustive(self, tiny_spec, tiny_coeffs):
        points = all_legal(tiny_spec)
        assert len(points) == 63
        for p in points:
            rec = compile(tiny_spec, tiny_coeffs, p)
            assert rec.range_violations(tiny_spec) == []

    @pytest.mark.parametrize("maker", [
        fixtures.make_alpha, fixtures.make_beta, fixtures.make_gamma, fixtures.make_delta,
    ])
    def test_randomized_ranges(self, maker):
        spec = maker()
        coeffs = CoefficientSet.generate(spec)
        for p in ds.sample_parametrizations(spec, 300, 17):
            rec = compile(spec, coeffs, p)
            assert rec.range_violations(spec) == []

    def test_cycle_margin(self, alpha_spec, alpha_coeffs):
        for p in ds.sample_parametrizations(alpha_spec, 100, 23):
            rec = compile(alpha_spec, alpha_coeffs, p)
            for corner in alpha_spec.corner_names():
                assert rec.get("cycle_time", corner) >= 1.05 * rec.get("access_time", corner)


class TestMonotonicity:
    """Randomized legal pairs differing in one parameter."""

    def pairs(self, spec, coeffs, name, lo, hi, n=40):
        rng = np.random.default_rng(31)
        count = 0
        while count < n:
            p = ds.sample_parametrizations(spec, 1, int(rng.integers(1 << 30)))[0]
            lo_vals = dict(p.values, **{name: lo})
            hi_vals = dict(p.values, **{name: hi})
            plo = Parametrization(spec.compiler_id, spec.version, lo_vals)
            phi = Parametrization(spec.compiler_id, spec.version, hi_vals)
            from memopt.paramspace import validate
            if not (validate(spec, plo)[0] and validate(spec, phi)[0]):
                continue
            count += 1
            yield compile(spec, coeffs, plo), compile(spec, coeffs, phi)

    def test_signs(self, alpha_spec, alpha_coeffs):
        corners = alpha_spec.corner_names()
        for lo, hi in self.pairs(alpha_spec, alpha_coeffs, "banks", 1, 2):
            assert hi.area > lo.area
            assert all(hi.get("access_time", c) < lo.get("access_time", c) for c in corners)
        for lo, hi in self.pairs(alpha_spec, alpha_coeffs, "periphery_vt", "low", "high"):
            assert all(hi.get("leakage", c) < lo.get("leakage", c) for c in corners)
            assert all(hi.get("cycle_time", c) > lo.get("cycle_time", c) for c in corners)
        for lo, hi in self.pairs(alpha_spec, alpha_coeffs, "word_width", 16, 64):
            assert hi.area > lo.area


class TestBatch:
    def test_empty(self, alpha_spec, alpha_coeffs):
        assert compile_batch(alpha_spec, alpha_coeffs, []) == []

    def test_batch_equals_individual(self, alpha_spec, alpha_coeffs):
        params = ds.sample_parametrizations(alpha_spec, 50, 3)
        batch = compile_batch(alpha_spec, alpha_coeffs, params, n_workers=8)
        single = [compile(alpha_spec, alpha_coeffs, p) for p in params]
        assert [r.values for r in batch] == [r.values for r in single]

    def test_error_carries_index(self, alpha_spec, alpha_coeffs):
        params = ds.sample_parametrizations(alpha_spec, 5, 3)
        params[3] = fixture_param(word_depth=33)
        with pytest.raises(ParametrizationInvalid, match="element 3"):
            compile_batch(alpha_spec, alpha_coeffs, params, n_workers=4)

    def test_parallel_wall_time(self, alpha_spec, alpha_coeffs):
        latency = 0.01
        params = ds.sample_parametrizations(alpha_spec, 100, 3)
        t0 = time.perf_counter()
        compile_batch(alpha_spec, alpha_coeffs, params,
                      simulated_latency=latency, n_workers=20)
        wall = time.perf_counter() - t0
        # 100 calls / 20 workers = 5 waves of ~10ms; far below serial 1s
        assert wall < 0.5
        assert wall >= 5 * latency * 0.8


class TestVariableLayout:
    def test_dimension_members(self, tiny_spec):
        members = dimension_members(tiny_spec)
        assert members["area"] == ["area"]
        assert len(members["leakage"]) == tiny_spec.n_corners
        names = ppa_variable_names(tiny_spec)
        assert names[0] == "area"
        assert len(names) == len(set(names))

    def test_vector_round_trip(self, tiny_spec, tiny_coeffs):
        p = all_legal(tiny_spec)[5]
        rec = compile(tiny_spec, tiny_coeffs, p)
        vec = rec.to_vector(tiny_spec)
        from memopt.synthcompiler import PpaRecord
        back = PpaRecord.from_vector(tiny_spec, vec)
        assert back.values == rec.values

    def test_coefficients_differ_between_compilers(self):
        a = CoefficientSet.generate(fixtures.make_alpha())
        b = CoefficientSet.generate(fixtures.make_beta())
        assert a.alpha != b.alpha

    def test_coefficients_deterministic(self, alpha_spec):
        a = CoefficientSet.generate(alpha_spec, 0)
        b = CoefficientSet.generate(alpha_spec, 0)
        c = CoefficientSet.generate(alpha_spec, 1)
        assert a == b
        assert a.alpha != c.alpha
