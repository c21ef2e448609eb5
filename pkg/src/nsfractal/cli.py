"""Command-line driver.

Usage: nsfractal --config run.json [--out DIR] [--seed N] [--tol F]
                 [--kmax N] [--quiet]

Exit codes: 0 success, 2 validation error (message names the offending
config field), 3 non-convergence (including a failing verify suite and
an unmet truncation certificate), 4 resource cap exceeded. Identical
config and seed produce byte-identical CSV/PGM/JSON artifacts.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    InvalidInputError,
    ResourceLimitError,
)
from .fif import fif_backward, pl_interpolant, write_grid_function_csv
from .metric import write_points_csv
from .raster import write_pgm
from .sfs import cifs_operator, sfs_backward, sfs_forward
from .trajectories import backward_trajectory, forward_trajectory, write_trajectory_csv
from .verify import report_to_json, run_verification_suite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_RESOURCE = 4

DEFAULT_RASTER_WIDTH = 512
DEFAULT_RASTER_HEIGHT = 512


def _json_out(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _say(quiet: bool, msg: str) -> None:
    if not quiet:
        print(msg)


def _point_list(p) -> list:
    return [float(v) for v in np.atleast_1d(p)]


def _run_trajectory(cfg: RunConfig, out: Path, quiet: bool) -> int:
    seq = cfg.payload["sequence"]
    runner = forward_trajectory if cfg.payload["direction"] == "forward" else backward_trajectory
    res = runner(seq, cfg.payload["x0"], tol=cfg.tol, kmax=cfg.kmax)
    csv_path = out / cfg.outputs.get("trajectory_csv", "trajectory.csv")
    write_trajectory_csv(csv_path, res)
    report = {
        "mode": "trajectory",
        "direction": cfg.payload["direction"],
        "converged": res.converged,
        "iterations_used": res.iterations_used,
        "limit": _point_list(res.limit) if res.converged else None,
        "accumulation_points": [_point_list(p) for p in res.accumulation_points],
        "final_gap": float(res.gaps[-1]) if len(res.gaps) else 0.0,
        "tol": cfg.tol,
        "kmax": cfg.kmax,
    }
    _json_out(out / cfg.outputs.get("report_json", "report.json"), report)
    _say(quiet, f"trajectory: converged={res.converged} iterations={res.iterations_used}")
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def _run_sfs(cfg: RunConfig, out: Path, quiet: bool) -> int:
    seq = cfg.payload["sequence"]
    runner = sfs_forward if cfg.payload["direction"] == "forward" else sfs_backward
    res = runner(
        seq,
        cfg.payload["initial_set"],
        tol=cfg.tol,
        kmax=cfg.kmax,
        resolution=cfg.payload["decimation_pitch"],
    )
    final = res.limit if res.converged else res.iterates[-1]
    write_points_csv(out / cfg.outputs.get("attractor_csv", "attractor.csv"), final)
    raster = cfg.payload["raster"]
    width = int(raster.get("width", DEFAULT_RASTER_WIDTH))
    height = int(raster.get("height", DEFAULT_RASTER_HEIGHT))
    write_pgm(out / cfg.outputs.get("attractor_pgm", "attractor.pgm"), final,
              width, height, cfg.payload["domain"])
    report = {
        "mode": "sfs",
        "direction": cfg.payload["direction"],
        "converged": res.converged,
        "iterations_used": res.iterations_used,
        "points": len(final),
        "accumulation_set_count": len(res.accumulation_sets),
        "final_gap": float(res.gaps[-1]) if len(res.gaps) else 0.0,
        "tol": cfg.tol,
        "kmax": cfg.kmax,
    }
    _json_out(out / cfg.outputs.get("report_json", "report.json"), report)
    _say(quiet, f"sfs: converged={res.converged} points={len(final)}")
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def _run_cifs(cfg: RunConfig, out: Path, quiet: bool) -> int:
    truncated, cert = cifs_operator(cfg.payload["system"], cfg.payload["initial_set"],
                                    eps=cfg.payload["eps"])
    write_points_csv(out / cfg.outputs.get("union_csv", "union.csv"), truncated)
    report = {"mode": "cifs", "points": len(truncated), "certificate": cert.to_dict()}
    _json_out(out / cfg.outputs.get("report_json", "report.json"), report)
    _say(quiet, f"cifs: terms={cert.n_terms} certificate_ok={cert.ok}")
    return EXIT_OK if cert.ok else EXIT_NO_CONVERGENCE


def _run_fif(cfg: RunConfig, out: Path, quiet: bool) -> int:
    stages = cfg.payload["stages"]
    grid = cfg.payload["grid"]
    g0 = pl_interpolant(cfg.payload["data"], grid)
    res = fif_backward(stages, g0, tol=cfg.tol, kmax=cfg.kmax)
    write_grid_function_csv(out / cfg.outputs.get("function_csv", "fif.csv"), res.function)
    report = {"mode": "fif", "grid_intervals": grid.intervals, **res.to_dict(),
              "tol": cfg.tol, "kmax": cfg.kmax}
    _json_out(out / cfg.outputs.get("report_json", "report.json"), report)
    _say(quiet, f"fif: converged={res.converged} iterations={res.iterations_used}")
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def _run_verify(cfg: RunConfig, out: Path, quiet: bool) -> int:
    report = run_verification_suite(seed=cfg.seed)
    path = out / cfg.outputs.get("report_json", "verify_report.json")
    path.write_text(report_to_json(report), encoding="utf-8")
    n_pass = sum(1 for c in report["checks"] if c["passed"])
    _say(quiet, f"verify: {n_pass}/{len(report['checks'])} checks passed")
    if not quiet:
        for c in report["checks"]:
            print(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    return EXIT_OK if report["all_passed"] else EXIT_NO_CONVERGENCE


def run(cfg: RunConfig, out_dir, quiet: bool = False) -> int:
    """Execute a validated run configuration; returns the process exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "trajectory": _run_trajectory,
        "sfs": _run_sfs,
        "cifs": _run_cifs,
        "fif": _run_fif,
        "verify": _run_verify,
    }
    return dispatch[cfg.mode](cfg, out, quiet)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nsfractal",
        description="Run non-stationary trajectory/attractor/interpolation computations "
        "from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory for artifacts")
    parser.add_argument("--seed", type=int, default=None, help="override the config RNG seed")
    parser.add_argument("--tol", type=float, default=None, help="override the config tolerance")
    parser.add_argument("--kmax", type=int, default=None, help="override the config iteration cap")
    parser.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.tol is not None:
            cfg.tol = args.tol
        if args.kmax is not None:
            cfg.kmax = args.kmax
        cfg.validate_knobs()
        return run(cfg, args.out, quiet=args.quiet)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InvalidInputError, DomainError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"error: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
