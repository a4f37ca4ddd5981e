"""Command-line pipelines.

Subcommands:

    solve    FULL or SLAB_TEST pipeline: solve, extract, verify, write
             solution.csv, fb.csv, boundary.csv, report.json, manifest.json
    axisym   same pipeline on the (r, y) axisymmetric reduction
    oracle   quadrature profiles and the eps -> 0 gap table
    reduce   full solve plus the reduced-obstacle boundary comparison
    sweep    cartesian (rho0, eps0, grid level) study, one sweep.csv row per run
    verify   re-run the checks on saved artifacts in --out

Flags: --config <path>, --out <dir>, --jobs <n>, --quiet.
Exit codes: 0 ok, 1 checks failed, 2 config invalid, 3 solver failure.
"""

from __future__ import annotations

import argparse
import copy
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import artifacts as art
from . import config as cfgmod
from .errors import ConfigError, PlaneFBError
from .fb_extract import extract_free_boundary
from .grid import AxisymField, Field
from .oracle import ode1d_penalized, slab_exact
from .reduced_obstacle import (build_reduced_from_solution, compare_boundaries,
                               solve_reduced)
from .solver import (SolveResult, continuation_solve, parabolic_solve,
                     slab_test_solve)
from .verify import verify_solution

logger = logging.getLogger("planefb.cli")

SLAB_ORACLE_TOL = 5e-4


def _solver_block(final) -> dict:
    return {
        "converged": final.converged,
        "status": final.status,
        "eps_schedule": list(final.eps_schedule),
        "eps_final": final.eps_final,
        "iterations": list(final.iterations),
        "fb_per_stage": final.fb_summary,
    }


def _extraction_block(fb) -> dict:
    return {
        "level_used": fb.level_used,
        "truncation_suspect": fb.truncation_suspect,
        "multi_crossing_columns": fb.multi_crossing_columns,
        "n_boundary_points": int(np.asarray(fb.boundary_points).size),
    }


def _run_field_pipeline(cfg: dict, out: Path, axisym: bool) -> int:
    t0 = time.time()
    grid = (cfgmod.axisym_grid_from_config(cfg) if axisym
            else cfgmod.grid_from_config(cfg))
    fam = cfgmod.penalty_from_config(cfg)
    ob = cfgmod.obstacle_from_config(cfg)
    params = cfgmod.params_from_config(cfg)
    vp = cfgmod.verify_params_from_config(cfg)
    results = continuation_solve(grid, fam, ob, params)
    final = results[-1]
    art.write_solution_csv(out / "solution.csv", final)
    if not final.converged:
        fb = extract_free_boundary(final, vp.level_factor,
                                   require_converged=False)
        art.write_fb_csv(out / "fb.csv", fb, final)
        art.write_boundary_csv(out / "boundary.csv", fb)
        art.write_report_json(out / "report.json", {
            "schema_version": 1, "solver": _solver_block(final),
            "overall_pass": False})
        art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                           {"solver": _solver_block(final)})
        logger.error("solver failed: %s", final.status)
        return 3
    fb = extract_free_boundary(final, vp.level_factor)
    prev = None
    if len(results) >= 2 and results[-2].converged:
        prev = (results[-2],
                extract_free_boundary(results[-2], vp.level_factor))
    report = verify_solution(final, fb, ob, vp, prev=prev)
    rep = report.to_dict()
    rep["solver"] = _solver_block(final)
    rep["extraction"] = _extraction_block(fb)
    if cfg["solve"]["cross_check"]:
        cross = parabolic_solve(grid, fam, ob, params, eps=final.eps_final)
        gap = float(np.abs(cross.field.data - final.field.data).max())
        rep["solver"]["cross_check"] = {
            "method": "PARABOLIC", "eps": final.eps_final,
            "converged": cross.converged, "sup_gap": gap,
            "steps": list(cross.iterations),
        }
    art.write_fb_csv(out / "fb.csv", fb, final)
    art.write_boundary_csv(out / "boundary.csv", fb)
    art.write_report_json(out / "report.json", rep)
    art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                       {"solver": _solver_block(final)})
    return 0 if report.overall_pass else 1


def _run_slab(cfg: dict, out: Path) -> int:
    t0 = time.time()
    fam = cfgmod.penalty_from_config(cfg)
    params = cfgmod.params_from_config(cfg)
    g = cfg["grid"]
    M = cfg["slab"]["value"]
    eps = cfg["slab"]["eps"]
    res = slab_test_solve(fam, M, eps, g["depth"], g["ny"], params)
    art.write_solution_csv(out / "solution.csv", res)
    prof = ode1d_penalized(fam, M, eps, res.field.ys)
    gap = float(np.abs(prof.samples[:, 1] - res.field.data).max())
    rep = {
        "schema_version": 1,
        "slab_oracle": {
            "M": M, "eps": eps, "ny": g["ny"], "sup_gap": gap,
            "slope_at_plane": prof.slope_at_plane,
            "tolerance": SLAB_ORACLE_TOL,
            "pass": bool(res.converged and gap <= SLAB_ORACLE_TOL),
        },
        "solver": _solver_block(res),
        "overall_pass": bool(res.converged and gap <= SLAB_ORACLE_TOL),
    }
    # plane record and boundary are degenerate for the slab column
    with open(out / "fb.csv", "w") as fh:
        fh.write("x,psi,u0,uy,in_omega,in_coincidence\n")
        hy = res.field.ys[1] - res.field.ys[0]
        uy = (3 * res.field.data[-1] - 4 * res.field.data[-2]
              + res.field.data[-3]) / (2 * hy)
        fh.write(",".join(art.fmt(v) for v in
                          (0.0, -M + eps, res.field.data[-1], uy, True, True))
                 + "\n")
    with open(out / "boundary.csv", "w") as fh:
        fh.write("x\n")
    art.write_report_json(out / "report.json", rep)
    art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                       {"solver": _solver_block(res)})
    if not res.converged:
        return 3
    return 0 if rep["overall_pass"] else 1


def _run_oracle(cfg: dict, out: Path) -> int:
    t0 = time.time()
    fam = cfgmod.penalty_from_config(cfg)
    M = cfg["oracle"]["M"]
    g = cfg["grid"]
    ys = (np.arange(g["ny"]) - (g["ny"] - 1)) * (g["depth"] / (g["ny"] - 1))
    rows = []
    for eps in cfg["oracle"]["eps_list"]:
        prof = ode1d_penalized(fam, M, eps, ys)
        exact = np.maximum(ys + M, 0.0)
        gap = float(np.abs(prof.samples[:, 1] - exact).max())
        rows.append((eps, prof.slope_at_plane, gap))
        art.write_profile_csv(out / f"oracle_eps{art.fmt(eps)}.csv", prof)
    art.write_oracle_gaps_csv(out / "oracle_gaps.csv", rows)
    art.write_manifest(out / "manifest.json", cfg, time.time() - t0)
    return 0


def _run_reduce(cfg: dict, out: Path) -> int:
    t0 = time.time()
    grid = cfgmod.grid_from_config(cfg)
    fam = cfgmod.penalty_from_config(cfg)
    ob = cfgmod.obstacle_from_config(cfg)
    params = cfgmod.params_from_config(cfg)
    vp = cfgmod.verify_params_from_config(cfg)
    results = continuation_solve(grid, fam, ob, params)
    final = results[-1]
    art.write_solution_csv(out / "solution.csv", final)
    if not final.converged:
        art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                           {"solver": _solver_block(final)})
        return 3
    fb = extract_free_boundary(final, vp.level_factor)
    problem = build_reduced_from_solution(final, fb, ob)
    w = solve_reduced(problem, tol=min(params.tol, 1e-10))
    thr = cfg["reduce"]["threshold"]
    cmp_rep = compare_boundaries(fb, w, thr)
    cmp_rep["tolerance_cells"] = 2.0
    cmp_rep["pass"] = bool(cmp_rep["hausdorff_cells"] <= 2.0)
    rep = {
        "schema_version": 1,
        "reduced": cmp_rep,
        "solver": _solver_block(final),
        "extraction": _extraction_block(fb),
        "overall_pass": bool(cmp_rep["pass"]),
    }
    art.write_fb_csv(out / "fb.csv", fb, final)
    art.write_boundary_csv(out / "boundary.csv", fb)
    art.write_reduced_csv(out / "reduced.csv", grid.xs, w)
    art.write_report_json(out / "report.json", rep)
    art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                       {"solver": _solver_block(final)})
    return 0 if rep["overall_pass"] else 1


SWEEP_HEADER = ["rho0", "eps0", "grid_level", "nx", "ny", "converged",
                "rho1_measured", "delta1_measured", "u_exponent",
                "psi_exponent", "u_coeff_normalized", "psi_coeff_normalized",
                "alpha_sup", "alpha_avg", "error"]


def _sweep_one(payload: str) -> list:
    cfg = json.loads(payload)
    axisym = cfg["mode"] == "AXISYM"
    key = "axisym_grid" if axisym else "grid"
    nx = cfg[key]["nr"] if axisym else cfg[key]["nx"]
    ny = cfg[key]["ny"]
    row = [cfg["obstacle"]["rho0"], cfg["solve"]["eps0"], cfg["_level"],
           nx, ny]
    try:
        grid = (cfgmod.axisym_grid_from_config(cfg) if axisym
                else cfgmod.grid_from_config(cfg))
        fam = cfgmod.penalty_from_config(cfg)
        ob = cfgmod.obstacle_from_config(cfg)
        params = cfgmod.params_from_config(cfg)
        vp = cfgmod.verify_params_from_config(cfg)
        results = continuation_solve(grid, fam, ob, params)
        final = results[-1]
        if not final.converged:
            return row + [False] + [None] * 8 + [final.status]
        fb = extract_free_boundary(final, vp.level_factor)
        report = verify_solution(final, fb, ob, vp)
        sg = report.support_growth
        ql = report.quad_lower_and_psi
        ho = report.holder
        return row + [
            True, sg.get("rho1_measured"), sg.get("delta1_measured"),
            ql.get("u_exponent"), ql.get("psi_exponent"),
            ql.get("u_coeff_normalized"), ql.get("psi_coeff_normalized"),
            ho.get("alpha_sup"), ho.get("alpha_avg"), "",
        ]
    except PlaneFBError as exc:
        return row + [False] + [None] * 8 + [f"{type(exc).__name__}: {exc}"]


def _run_sweep(cfg: dict, out: Path, jobs: int) -> int:
    t0 = time.time()
    variants = []
    for rho0, eps0, level in itertools.product(
            cfg["sweep"]["rho0"], cfg["sweep"]["eps0"],
            cfg["sweep"]["grid_level"]):
        sub = copy.deepcopy(cfg)
        sub["mode"] = "AXISYM" if cfg["mode"] == "AXISYM" else "FULL"
        sub["obstacle"]["rho0"] = rho0
        sub["solve"]["eps0"] = eps0
        for key, nkey in (("grid", "nx"), ("grid", "ny"),
                          ("axisym_grid", "nr"), ("axisym_grid", "ny")):
            sub[key][nkey] = (sub[key][nkey] - 1) * 2**level + 1
        sub["_level"] = level
        variants.append(json.dumps(sub, sort_keys=True))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, variants))
    else:
        rows = [_sweep_one(v) for v in variants]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    art.write_sweep_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    art.write_manifest(out / "manifest.json", cfg, time.time() - t0,
                       {"n_runs": len(rows)})
    return 0


def _run_verify(out: Path) -> int:
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError("manifest.json", f"not found under {out}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    cfg = cfgmod.validate_config(manifest["config"])
    solver = manifest.get("solver", {})
    if not solver.get("converged", False):
        logger.error("saved artifacts are from a failed solve")
        return 3
    axisym = cfg["mode"] == "AXISYM"
    grid = (cfgmod.axisym_grid_from_config(cfg) if axisym
            else cfgmod.grid_from_config(cfg))
    data = _read_solution_csv(out / "solution.csv", grid,
                              cfg["grid"]["plane_dim"] if not axisym else None)
    fam = cfgmod.penalty_from_config(cfg)
    ob = cfgmod.obstacle_from_config(cfg)
    params = cfgmod.params_from_config(cfg)
    vp = cfgmod.verify_params_from_config(cfg)
    from .obstacle import sample_plane
    field = AxisymField(grid, data) if axisym else Field(grid, data)
    res = SolveResult(
        field=field, eps_final=solver["eps_final"],
        eps_schedule=tuple(solver["eps_schedule"]),
        residual_history=[], iterations=list(solver["iterations"]),
        energy_history=[], converged=True, phi_plane=sample_plane(ob, grid),
        obstacle=ob, fam=fam, params=params,
        mode="axisym" if axisym else "cartesian")
    fb = extract_free_boundary(res, vp.level_factor)
    report = verify_solution(res, fb, ob, vp)
    rep = report.to_dict()
    rep["solver"] = solver
    rep["extraction"] = _extraction_block(fb)
    art.write_report_json(out / "report.json", rep)
    return 0 if report.overall_pass else 1


def _read_solution_csv(path, grid, plane_dim):
    raw = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.zeros(grid.shape)
    if plane_dim == 2:
        i1 = raw[:, 0].astype(int)
        i2 = raw[:, 1].astype(int)
        j = raw[:, 2].astype(int)
        data[i1, i2, j] = raw[:, 6]
    else:
        i = raw[:, 0].astype(int)
        j = raw[:, 1].astype(int)
        data[i, j] = raw[:, 4]
    return data


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="planefb",
        description="Free boundary meeting a diffusive plane: solve, "
                    "extract, verify.")
    p.add_argument("command", choices=["solve", "axisym", "oracle", "reduce",
                                       "sweep", "verify"])
    p.add_argument("--config", type=str, default=None,
                   help="JSON config path (defaults to the built-in config)")
    p.add_argument("--out", type=str, default=None,
                   help="output directory (default: config out_dir)")
    p.add_argument("--jobs", type=int, default=1,
                   help="concurrent runs for sweep")
    p.add_argument("--quiet", action="store_true",
                   help="suppress progress log lines")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s", stream=sys.stderr)
    try:
        if args.command == "verify":
            out = Path(args.out if args.out else ".")
            return _run_verify(out)
        if args.config:
            cfg = cfgmod.load_config(args.config)
        else:
            cfg = cfgmod.validate_config({})
        out = Path(args.out if args.out else cfg["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        mode = cfg["mode"]
        if args.command == "solve":
            if mode == "SLAB_TEST":
                return _run_slab(cfg, out)
            if mode not in ("FULL",):
                raise ConfigError("mode", f"'solve' expects FULL or "
                                          f"SLAB_TEST, config says {mode}")
            return _run_field_pipeline(cfg, out, axisym=False)
        if args.command == "axisym":
            cfg["mode"] = "AXISYM"
            return _run_field_pipeline(cfg, out, axisym=True)
        if args.command == "oracle":
            return _run_oracle(cfg, out)
        if args.command == "reduce":
            if cfg["mode"] == "AXISYM":
                raise ConfigError("mode", "'reduce' runs on Cartesian grids")
            return _run_reduce(cfg, out)
        if args.command == "sweep":
            return _run_sweep(cfg, out, args.jobs)
        raise ConfigError("command", f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PlaneFBError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
