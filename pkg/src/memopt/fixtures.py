"""Builtin fixture compiler specs for tests, demos and the desk-scale zoo.

Four compilers (alpha, beta, gamma, delta) share the 1rw port
configuration and the corner names slow/typ/fast, so cross-compiler
optimization runs work out of the box. ``alpha`` additionally ships a
version 2.0 with 15 corners. ``tiny`` is a reduced 2rw space small
enough for exhaustive checks.
"""

from __future__ import annotations

from pathlib import Path

from .paramspace import (
    CompilerSpec,
    ConstraintRule,
    CornerDef,
    ParamDef,
    save_spec,
)


def _corners3(p_slow, v_slow, t_hot, p_fast, v_fast, t_cold):
    return (
        CornerDef("slow", p_slow, v_slow, t_hot),
        CornerDef("typ", 1.0, 1.0, 1.0),
        CornerDef("fast", p_fast, v_fast, t_cold),
    )


def _arch_params():
    return (
        ParamDef("dual_rail", (0, 1)),
        ParamDef("banks", (1, 2, 4)),
        ParamDef("column_mux", (4, 8, 16)),
        ParamDef("periphery_vt", ("low", "standard", "high")),
        ParamDef("redundancy", ("none", "row", "row+io")),
    )


def _bank_rules():
    return (
        ConstraintRule("banks", "word_depth", "<", 128, (1, 2)),
        ConstraintRule("banks", "word_depth", ">=", 8192, (2, 4)),
    )


_DEPTH_LADDER = (
    32, 48, 64, 96, 128, 192, 256, 384, 512, 768,
    1024, 1536, 2048, 3072, 4096, 6144, 8192, 12288, 16384, 24576, 32768,
)
_WIDTH_LADDER = (8, 12, 16, 24, 32, 48, 64, 80, 96, 128, 160, 192, 256, 320)


def _depths(lo, hi):
    return tuple(d for d in _DEPTH_LADDER if lo <= d <= hi)


def _widths(lo, hi):
    return tuple(w for w in _WIDTH_LADDER if lo <= w <= hi)


def make_alpha(version: str = "1.0") -> CompilerSpec:
    corners: tuple[CornerDef, ...]
    if version == "2.0":
        corners = tuple(
            CornerDef(f"{proc}_{int(volt * 100):03d}v", pf, volt, tf)
            for proc, pf in (("ss", 1.12), ("tt", 1.0), ("ff", 0.9))
            for volt, tf in (
                (0.90, 1.12),
                (0.95, 1.06),
                (1.00, 1.0),
                (1.05, 0.94),
                (1.10, 0.88),
            )
        )
    else:
        corners = _corners3(1.12, 0.92, 1.12, 0.90, 1.08, 0.88)
    return CompilerSpec(
        compiler_id="alpha",
        version=version,
        port_config="1rw",
        arch_params=_arch_params(),
        depth_values=_depths(32, 8192),
        width_values=_widths(8, 160),
        corners=corners,
        constraint_rules=_bank_rules(),
    )


def make_beta() -> CompilerSpec:
    return CompilerSpec(
        compiler_id="beta",
        version="1.0",
        port_config="1rw",
        arch_params=_arch_params(),
        depth_values=_depths(64, 16384),
        width_values=_widths(16, 256),
        corners=_corners3(1.10, 0.94, 1.10, 0.92, 1.06, 0.90),
        constraint_rules=_bank_rules(),
    )


def make_gamma() -> CompilerSpec:
    return CompilerSpec(
        compiler_id="gamma",
        version="1.0",
        port_config="1rw",
        arch_params=_arch_params(),
        depth_values=_depths(32, 4096),
        width_values=_widths(8, 64),
        corners=_corners3(1.14, 0.90, 1.14, 0.88, 1.10, 0.86),
        constraint_rules=_bank_rules(),
    )


def make_delta() -> CompilerSpec:
    return CompilerSpec(
        compiler_id="delta",
        version="1.0",
        port_config="1rw",
        arch_params=_arch_params(),
        depth_values=_depths(256, 32768),
        width_values=_widths(32, 320),
        corners=_corners3(1.08, 0.95, 1.08, 0.93, 1.05, 0.92),
        constraint_rules=_bank_rules(),
    )


def make_tiny() -> CompilerSpec:
    """Reduced space (63 legal points) for exhaustive property checks."""
    return CompilerSpec(
        compiler_id="tiny",
        version="1.0",
        port_config="2rw",
        arch_params=(
            ParamDef("banks", (1, 2)),
            ParamDef("periphery_vt", ("low", "standard", "high")),
        ),
        depth_values=(32, 64, 128, 256),
        width_values=(8, 16, 32),
        corners=_corners3(1.10, 0.93, 1.10, 0.90, 1.07, 0.90),
        constraint_rules=(ConstraintRule("banks", "word_depth", "<", 64, (1,)),),
    )


def builtin_specs() -> list[CompilerSpec]:
    return [
        make_alpha("1.0"),
        make_alpha("2.0"),
        make_beta(),
        make_gamma(),
        make_delta(),
        make_tiny(),
    ]


def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def install_fixture_specs(directory) -> list[Path]:
    """Write one spec file per builtin compiler version into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for spec in builtin_specs():
        path = directory / f"{spec.compiler_id}__{spec.version}.json"
        save_spec(spec, path)
        paths.append(path)
    return paths
