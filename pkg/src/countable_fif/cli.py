"""Command-line front end.

Commands:
    cfif build       --config sys.toml          validate + print system data
    cfif interpolate --config sys.toml          fixed-point iteration -> CSV/JSON
    cfif attractor   --config sys.toml          cloud iteration -> CSV/JSON
    cfif verify      --config sys.toml          all certificates -> report

Exit codes: 0 success, 2 malformed config, 3 invalid system, 4 iteration did
not converge, 5 a verification certificate failed.

Outputs are deterministic: seeds come from the config, CSV floats carry 17
significant digits with LF line endings, JSON uses sorted keys.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys as _sysmod
from pathlib import Path

import numpy as np

from . import attractor as att
from . import interpolation as interp
from .config import RunConfig, apply_overrides, build_from_config, load_config
from .datasys import tail_bound
from .errors import (ConfigError, CountableFifError, InvalidInputError,
                     RangeViolationError, ValidationError)
from .maps import non_banach_witness, rakotch_certificate, sample_point_pairs
from .metrics import ThetaMetric, certify_rakotch

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVALID = 3
EXIT_NO_CONVERGENCE = 4
EXIT_VERIFY_FAILED = 5


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path, rows, header="x,y"):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def write_json(path: Path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _as_dict(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _as_dict(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _as_dict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_dict(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _iteration_config(cfg: RunConfig, ms) -> att.IterationConfig:
    metric = None if cfg.metric == "d1" else ThetaMetric(ms.theta)
    return att.IterationConfig(
        initial_set=cfg.initial_set, max_iterations=cfg.attractor_max_iter,
        tol=cfg.attractor_tol, dedup_tol=cfg.dedup_tol, metric=metric,
        size_cap=cfg.cloud_cap)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_build(cfg: RunConfig) -> int:
    sys, ms = build_from_config(cfg)
    tb = tail_bound(sys, ms)
    print(f"a = {_fmt(sys.a)}")
    print(f"b = {_fmt(sys.b)}")
    print(f"m = {_fmt(sys.m)}")
    print(f"M = {_fmt(sys.M)}")
    print(f"family = {ms.family}")
    print(f"sup_Ln = {_fmt(ms.sup_ln)}")
    print(f"L = {_fmt(ms.L)}")
    print(f"theta = {_fmt(ms.theta)}")
    print(f"tail_bound = {_fmt(tb)}")
    lo, hi = ms.y_eval
    if (lo, hi) != (sys.y_lo, sys.y_hi):
        print(f"y_eval = [{_fmt(lo)}, {_fmt(hi)}]  (enlarged from "
              f"[{_fmt(sys.y_lo)}, {_fmt(sys.y_hi)}] to close the maps)")
    return EXIT_OK


def cmd_interpolate(cfg: RunConfig) -> int:
    sys, ms = build_from_config(cfg)
    f, report = interp.picard_iterate(ms, seed=cfg.seed_function, grid=cfg.grid,
                                      tol=cfg.tol, max_iter=cfg.max_iter)
    out = Path(cfg.out_dir)
    write_csv(out / "interpolant.csv", zip(f.grid, f.values))
    write_json(out / "residual_report.json", _as_dict(report))
    print(f"iterations = {report.iterations}")
    print(f"sup_residual = {_fmt(report.sup_residual)}")
    print(f"max_node_error = {_fmt(max(report.node_errors))}")
    print(f"converged = {report.converged}")
    if not report.converged:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_attractor(cfg: RunConfig) -> int:
    sys, ms = build_from_config(cfg)
    result = att.iterate_attractor(ms, _iteration_config(cfg, ms))
    out = Path(cfg.out_dir)
    write_csv(out / "attractor.csv", result.cloud.pts)
    write_json(out / "attractor_trace.json", {
        "iterations": result.iterations,
        "converged": result.converged,
        "effective_dedup": result.effective_dedup,
        "trace": list(result.hausdorff_trace),
    })
    print(f"iterations = {result.iterations}")
    print(f"cloud_size = {len(result.cloud)}")
    print(f"converged = {result.converged}")
    if not result.converged:
        return EXIT_NO_CONVERGENCE
    f, rep = interp.picard_iterate(ms, seed=cfg.seed_function, grid=cfg.grid,
                                   tol=cfg.tol, max_iter=cfg.max_iter)
    if rep.converged:
        gd = att.graph_vs_attractor(f, result, ms, resolution=cfg.grid)
        write_json(out / "graph_distance.json", _as_dict(gd))
        print(f"graph_distance = {_fmt(gd.distance)} (bound {_fmt(gd.bound)})")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    sys, ms = build_from_config(cfg)
    checks = {}

    cert_phi = certify_rakotch(ms.W.phi, np.geomspace(1e-6, 10.0, 60))
    checks["phi_certificate"] = _as_dict(cert_phi)

    pairs = sample_point_pairs(ms, 1000, seed=cfg.seed)
    cert_maps = rakotch_certificate(ms, pairs, seed=cfg.seed)
    checks["map_contraction"] = _as_dict(cert_maps)

    rng_fns = interp.random_c_space_functions(ms, 2 * 100, seed=cfg.seed,
                                              grid=cfg.grid)
    grid = interp.make_grid(sys, cfg.grid)
    worst = None
    violations = 0
    for i in range(0, len(rng_fns), 2):
        g_fn = interp.GridInterpolant(grid, rng_fns[i], ms)
        h_fn = interp.GridInterpolant(grid, rng_fns[i + 1], ms)
        rep = interp.t_contraction_check(ms, g_fn, h_fn, grid=grid)
        if not rep.passed:
            violations += 1
        excess = rep.dist_after - rep.phi_bound
        if worst is None or excess > worst:
            worst = excess
    checks["operator_contraction"] = {
        "pairs": len(rng_fns) // 2, "violations": violations,
        "worst_excess": worst, "passed": violations == 0,
    }

    f, rep = interp.picard_iterate(ms, seed=cfg.seed_function, grid=cfg.grid,
                                   tol=cfg.tol, max_iter=cfg.max_iter)
    interp_rep = interp.verify_interpolation(f, sys, tol=1e-9)
    checks["interpolation"] = _as_dict(interp_rep)
    checks["interpolation"]["converged"] = rep.converged

    result = att.iterate_attractor(ms, _iteration_config(cfg, ms))
    gd = att.graph_vs_attractor(f, result, ms, resolution=cfg.grid)
    checks["graph_vs_attractor"] = _as_dict(gd)

    comm = att.commutation_check(ms, seed="chord", resolution=cfg.grid)
    checks["graph_commutation"] = _as_dict(comm)

    if ms.family == "B":
        witness = non_banach_witness(ms)
        checks["non_banach_witness"] = _as_dict(witness)

    flat_pass = {
        "phi_certificate": cert_phi.passed,
        "map_contraction": cert_maps.passed,
        "operator_contraction": violations == 0,
        "interpolation": interp_rep.passed and rep.converged,
        "graph_vs_attractor": gd.passed and result.converged,
        "graph_commutation": comm.passed,
    }
    if ms.family == "B":
        flat_pass["non_banach_witness"] = checks["non_banach_witness"]["found"]

    out = Path(cfg.out_dir)
    write_json(out / "verify_report.json", {"checks": checks, "passed": flat_pass,
                                            "all_passed": all(flat_pass.values())})
    for name, ok in flat_pass.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if not all(flat_pass.values()):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfif",
                                description="fractal interpolation for countable "
                                            "systems of data")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("build", cmd_build), ("interpolate", cmd_interpolate),
                     ("attractor", cmd_attractor), ("verify", cmd_verify)):
        q = sub.add_parser(name)
        q.set_defaults(fn=fn)
        q.add_argument("--config", required=True, help="TOML run configuration")
        q.add_argument("--out", help="output directory")
        q.add_argument("--grid", type=int, help="grid resolution")
        q.add_argument("--depth", type=int, help="truncation depth N")
        q.add_argument("--tol", type=float, help="iteration tolerance")
        q.add_argument("--max-iter", type=int, help="iteration cap")
        q.add_argument("--family", choices=("A", "B"), help="map family")
        q.add_argument("--seed", type=int, help="random seed for certificates")
        q.add_argument("--metric", choices=("d1", "dtheta"), help="cloud metric")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(
            cfg, out_dir=args.out, grid=args.grid, depth=args.depth,
            tol=args.tol, max_iter=getattr(args, "max_iter", None),
            family=args.family, seed=args.seed, metric=args.metric)
        if cfg.family == "B" and args.family == "B":
            cfg.d_seq = None  # switching family drops any d-table
        return args.fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sysmod.stderr)
        return EXIT_CONFIG
    except (ValidationError, RangeViolationError, InvalidInputError) as exc:
        print(f"invalid system: {exc}", file=_sysmod.stderr)
        return EXIT_INVALID
    except CountableFifError as exc:  # pragma: no cover - catch-all guard
        print(f"error: {exc}", file=_sysmod.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
