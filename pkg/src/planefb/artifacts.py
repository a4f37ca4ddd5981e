"""Deterministic artifact writers.

All floats print with 17 significant digits ("%.17g"), so repeated runs of
the same config produce byte-identical CSV and JSON files.  Wall-clock
values live only in manifest.json; every other artifact is a pure function
of the solve.

Files written by the pipelines:

    solution.csv   nodal field; header i,j,x,y,u (N=1 / axisym, where x is
                   the radius; slab columns use i=0, x=0) or
                   i1,i2,j,x1,x2,y,u for N=2
    fb.csv         plane record: x..., psi, u0, uy, in_omega, in_coincidence
    boundary.csv   extracted boundary points (N=1/axisym: x per row;
                   N=2: seg,xa,ya,xb,yb per contour segment)
    report.json    VerificationReport plus solver/extraction summaries
    manifest.json  config echo, package/library versions, wall time
    sweep.csv      one row per sweep run
    oracle_*.csv   quadrature profiles and the eps-gap table
"""

from __future__ import annotations

import json
import platform
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_rows(path, header, rows):
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_solution_csv(path, res):
    f = res.field
    if res.mode == "slab":
        ys = f.ys
        rows = ((0, j, 0.0, ys[j], f.data[j]) for j in range(ys.size))
        _write_rows(path, ["i", "j", "x", "y", "u"], rows)
        return
    grid = f.grid
    if res.mode == "axisym":
        rows = ((i, j, grid.rs[i], grid.ys[j], f.data[i, j])
                for i in range(grid.nr) for j in range(grid.ny))
        _write_rows(path, ["i", "j", "x", "y", "u"], rows)
        return
    if grid.plane_dim == 1:
        rows = ((i, j, grid.xs[i], grid.ys[j], f.data[i, j])
                for i in range(grid.nx) for j in range(grid.ny))
        _write_rows(path, ["i", "j", "x", "y", "u"], rows)
        return
    rows = ((i1, i2, j, grid.xs[i1], grid.xs[i2], grid.ys[j],
             f.data[i1, i2, j])
            for i1 in range(grid.nx) for i2 in range(grid.nx)
            for j in range(grid.ny))
    _write_rows(path, ["i1", "i2", "j", "x1", "x2", "y", "u"], rows)


def write_fb_csv(path, fb, res):
    tr = res.field.data[..., -1]
    if fb.mode == "axisym" or fb.psi.ndim == 1:
        xs = fb.grid.rs if fb.mode == "axisym" else fb.grid.xs
        rows = ((xs[i], fb.psi[i], tr[i], fb.uy_trace[i],
                 fb.omega_mask[i], fb.coincidence_mask[i])
                for i in range(xs.size))
        _write_rows(path, ["x", "psi", "u0", "uy", "in_omega",
                           "in_coincidence"], rows)
        return
    xs = fb.grid.xs
    rows = ((xs[i1], xs[i2], fb.psi[i1, i2], tr[i1, i2],
             fb.uy_trace[i1, i2], fb.omega_mask[i1, i2],
             fb.coincidence_mask[i1, i2])
            for i1 in range(xs.size) for i2 in range(xs.size))
    _write_rows(path, ["x1", "x2", "psi", "u0", "uy", "in_omega",
                       "in_coincidence"], rows)


def write_boundary_csv(path, fb):
    if fb.mode == "axisym" or fb.psi.ndim == 1:
        pts = np.asarray(fb.boundary_points).reshape(-1)
        _write_rows(path, ["x"], ((p,) for p in pts))
        return
    segs = np.asarray(fb.boundary_points)
    rows = ((k, segs[k, 0, 0], segs[k, 0, 1], segs[k, 1, 0], segs[k, 1, 1])
            for k in range(segs.shape[0]))
    _write_rows(path, ["seg", "xa", "ya", "xb", "yb"], rows)


def write_report_json(path, report: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_manifest(path, cfg: dict, wall_time: float, extras: dict | None = None):
    import numba
    import scipy

    from . import __version__
    manifest = {
        "config": cfg,
        "versions": {
            "planefb": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
            "python": platform.python_version(),
        },
        "wall_time_seconds": wall_time,
    }
    if extras:
        manifest.update(extras)
    with open(path, "w") as fh:
        json.dump(_jsonable(manifest), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_profile_csv(path, profile):
    rows = ((profile.samples[k, 0], profile.samples[k, 1])
            for k in range(profile.samples.shape[0]))
    _write_rows(path, ["y", "u"], rows)


def write_oracle_gaps_csv(path, rows):
    _write_rows(path, ["eps", "slope_at_plane", "sup_gap_vs_slab"], rows)


def write_sweep_csv(path, header, rows):
    _write_rows(path, header, rows)


def write_reduced_csv(path, xs, w):
    if w.ndim == 1:
        _write_rows(path, ["x", "w"], ((xs[i], w[i]) for i in range(xs.size)))
    else:
        rows = ((xs[i1], xs[i2], w[i1, i2])
                for i1 in range(xs.size) for i2 in range(xs.size))
        _write_rows(path, ["x1", "x2", "w"], rows)
