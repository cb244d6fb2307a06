"""Declarative run configuration.

A run is described by a single TOML file: the data-system generators with
their exact limits, the map family, and numeric controls.  Example:

    [system]
    depth = 8
    y_interval = [0.0, 1.0]

    [system.x]                  # x_n = offset + scale * base^n -> limit offset
    kind = "geometric"
    base = 0.5
    scale = -1.0
    offset = 1.0

    [system.y]
    kind = "geometric"
    base = 0.3333333333333333
    scale = -1.0
    offset = 1.0

    [family]
    kind = "A"                  # "A" or "B"

    [run]
    grid = 4096
    tol = 1e-10

Sequence kinds: geometric(base, scale, offset), harmonic(scale, offset),
constant(value), table(values, limit).  Numbers are decimal doubles.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .datasys import CountableDataSystem, SequenceSpec, build_system
from .errors import ConfigError
from .maps import MapSystem, build_map_system


@dataclass
class RunConfig:
    depth: int
    y_interval: tuple[float, float]
    x_seq: dict
    y_seq: dict
    family: str
    d_seq: dict | None
    grid: int = 4096
    tol: float = 1e-10
    max_iter: int = 10_000
    seed: int = 42
    metric: str = "d1"
    seed_function: str = "chord"
    attractor_tol: float = 5e-4
    attractor_max_iter: int = 400
    dedup_tol: float = 1e-7
    cloud_cap: int = 50_000
    initial_set: str = "nodes"
    out_dir: str = "out"


def _need(table: dict, key: str, section: str):
    if key not in table:
        raise ConfigError(f"missing field {section}.{key}")
    return table[key]


def _sequence_from(table: dict, section: str) -> SequenceSpec:
    kind = _need(table, "kind", section)
    try:
        if kind == "geometric":
            return SequenceSpec.geometric(float(_need(table, "base", section)),
                                          float(_need(table, "scale", section)),
                                          float(_need(table, "offset", section)))
        if kind == "harmonic":
            return SequenceSpec.harmonic(float(_need(table, "scale", section)),
                                         float(_need(table, "offset", section)))
        if kind == "constant":
            return SequenceSpec.constant(float(_need(table, "value", section)))
        if kind == "table":
            return SequenceSpec.table([float(v) for v in _need(table, "values", section)],
                                      float(_need(table, "limit", section)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in {section}: {exc}") from exc
    raise ConfigError(f"{section}.kind must be geometric|harmonic|constant|table, "
                      f"got {kind!r}")


def load_config(path: str | Path) -> RunConfig:
    """Parse and structurally validate a TOML run configuration."""
    p = Path(path)
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    system = raw.get("system")
    if not isinstance(system, dict):
        raise ConfigError("missing [system] section")
    family = raw.get("family")
    if not isinstance(family, dict):
        raise ConfigError("missing [family] section")

    y_iv = _need(system, "y_interval", "system")
    if (not isinstance(y_iv, (list, tuple)) or len(y_iv) != 2):
        raise ConfigError("system.y_interval must be [lo, hi]")
    depth = _need(system, "depth", "system")
    if not isinstance(depth, int) or depth < 1:
        raise ConfigError("system.depth must be a positive integer")

    fam_kind = _need(family, "kind", "family")
    if fam_kind not in ("A", "B"):
        raise ConfigError(f"family.kind must be 'A' or 'B', got {fam_kind!r}")
    d_seq = family.get("d")
    if d_seq is not None and not isinstance(d_seq, dict):
        raise ConfigError("[family.d] must be a table")

    run = raw.get("run", {})
    out = raw.get("output", {})
    cfg = RunConfig(
        depth=depth,
        y_interval=(float(y_iv[0]), float(y_iv[1])),
        x_seq=dict(_need(system, "x", "system")),
        y_seq=dict(_need(system, "y", "system")),
        family=fam_kind,
        d_seq=dict(d_seq) if d_seq is not None else None,
        out_dir=str(out.get("dir", "out")),
    )
    numeric = {
        "grid": int, "tol": float, "max_iter": int, "seed": int,
        "attractor_tol": float, "attractor_max_iter": int,
        "dedup_tol": float, "cloud_cap": int,
    }
    for key, cast in numeric.items():
        if key in run:
            try:
                setattr(cfg, key, cast(run[key]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for run.{key}: {run[key]!r}") from exc
    for key in ("metric", "initial_set", "seed_function"):
        if key in run:
            setattr(cfg, key, str(run[key]))
    if cfg.metric not in ("d1", "dtheta"):
        raise ConfigError(f"run.metric must be 'd1' or 'dtheta', got {cfg.metric!r}")
    # the sequence tables must at least parse
    _sequence_from(cfg.x_seq, "system.x")
    _sequence_from(cfg.y_seq, "system.y")
    if cfg.d_seq is not None:
        _sequence_from(cfg.d_seq, "family.d")
    return cfg


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """CLI-flag overrides; unknown keys are a programming error."""
    out = dataclasses.replace(cfg)
    for key, val in overrides.items():
        if val is None:
            continue
        if not hasattr(out, key):
            raise ConfigError(f"unknown override {key!r}")
        setattr(out, key, val)
    return out


def build_from_config(cfg: RunConfig) -> tuple[CountableDataSystem, MapSystem]:
    """Instantiate and validate the data system and map system."""
    xs = _sequence_from(cfg.x_seq, "system.x")
    ys = _sequence_from(cfg.y_seq, "system.y")
    sys = build_system(xs, ys, cfg.depth, cfg.y_interval)
    d_spec = _sequence_from(cfg.d_seq, "family.d") if cfg.d_seq is not None else None
    if cfg.family == "B" and d_spec is not None:
        raise ConfigError("family B takes no [family.d] table")
    ms = build_map_system(sys, family=cfg.family, d_spec=d_spec)
    return sys, ms
