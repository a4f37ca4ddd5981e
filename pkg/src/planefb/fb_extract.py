"""Free surface and contact set extraction from a converged solve.

The free surface is read as the u = level set with level = level_factor *
eps_final (default factor 1): per plane column, scanning upward from the
bottom, psi is the linearly interpolated y of the last upward crossing.
The plane positivity set Omega uses the same level by default; its boundary
comes from segment-wise linear interpolation (two crossing points per
component for N = 1, marching squares for N = 2, a crossing radius for the
axisymmetric reduction).

Near the contact line the transition layer and the quadratic detachment
interact, so psi within a collar of width ~2 sqrt(eps) of the boundary is
treated as unreliable by the downstream fitters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyOmega, NotConverged
from .grid import AxisymField, AxisymGrid
from .operators import one_sided_uy


@dataclass
class FreeBoundary:
    """Extracted free surface graph and plane sets.

    psi is NaN on columns without a crossing; boundary_points is an array
    of crossing coordinates (N=1, axisym) or an (m, 2, 2) array of contour
    segments (N=2).
    """

    psi: np.ndarray
    omega_mask: np.ndarray
    boundary_points: np.ndarray
    coincidence_mask: np.ndarray
    uy_trace: np.ndarray
    level_used: float
    truncation_suspect: bool
    multi_crossing_columns: int
    mode: str
    grid: object


def _require_converged(res, require_converged):
    if require_converged and not res.converged:
        raise NotConverged(f"solver status {res.status!r}")


def extract_psi(res, level_factor: float = 1.0,
                require_converged: bool = True) -> np.ndarray:
    """Free surface graph samples psi per plane column (NaN where none)."""
    _require_converged(res, require_converged)
    u = res.field.data
    grid = res.field.grid if hasattr(res.field, "grid") else None
    if res.mode == "slab":
        ys = res.field.ys
        hy = ys[1] - ys[0]
        psi, _ = _column_crossing(u, ys, hy, level_factor * res.eps_final)
        return np.array([psi])
    level = level_factor * res.eps_final
    ys = grid.ys
    hy = grid.hy
    cols = u.reshape(-1, u.shape[-1])
    psi = np.full(cols.shape[0], np.nan)
    multi = 0
    for k in range(cols.shape[0]):
        psi[k], nc = _column_crossing(cols[k], ys, hy, level)
        if nc > 1:
            multi += 1
    return psi.reshape(u.shape[:-1])


def _column_crossing(col, ys, hy, level):
    """(interpolated y of last upward crossing, crossing count)."""
    below = col < level
    ups = np.nonzero(below[:-1] & ~below[1:])[0]
    if ups.size == 0:
        return np.nan, 0
    j = ups[-1]
    t = (level - col[j]) / (col[j + 1] - col[j])
    return ys[j] + t * hy, int(ups.size)


def extract_omega(res, plane_threshold: float | None = None,
                  require_converged: bool = True):
    """(omega_mask, boundary_points, truncation_suspect) for the plane trace.

    Threshold defaults to the psi extraction level (eps_final).  A mask
    that reaches the lateral boundary has no extractable boundary and is
    flagged truncation-suspect.  Raises EmptyOmega on an empty mask.
    """
    _require_converged(res, require_converged)
    thr = res.eps_final if plane_threshold is None else float(plane_threshold)
    grid = res.field.grid
    tr = res.field.data[..., -1]
    mask = tr > thr
    if not mask.any():
        raise EmptyOmega(f"no plane nodes above threshold {thr}")
    if res.mode == "axisym":
        pts, suspect = _crossings_1d(grid.rs, tr, thr, mask)
        return mask, pts, suspect
    if grid.plane_dim == 1:
        pts, suspect = _crossings_1d(grid.xs, tr, thr, mask)
        return mask, pts, suspect
    segs = _marching_squares(grid.xs, tr, thr)
    suspect = bool(mask[0, :].any() or mask[-1, :].any()
                   or mask[:, 0].any() or mask[:, -1].any())
    return mask, segs, suspect


def _crossings_1d(xs, tr, thr, mask):
    sign = tr > thr
    idx = np.nonzero(sign[:-1] != sign[1:])[0]
    pts = []
    for i in idx:
        t = (thr - tr[i]) / (tr[i + 1] - tr[i])
        pts.append(xs[i] + t * (xs[1] - xs[0]))
    suspect = bool(sign[0] or sign[-1])
    return np.asarray(pts), suspect


def _marching_squares(xs, tr, thr) -> np.ndarray:
    """Contour segments of tr = thr on the square plane grid, (m, 2, 2)."""
    f = tr - thr
    n = xs.size
    segs = []

    def edge_point(i1, k1, i2, k2):
        a, b = f[i1, k1], f[i2, k2]
        t = a / (a - b)
        return (xs[i1] + t * (xs[i2] - xs[i1]),
                xs[k1] + t * (xs[k2] - xs[k1]))

    for i in range(n - 1):
        for k in range(n - 1):
            corners = [(i, k), (i + 1, k), (i + 1, k + 1), (i, k + 1)]
            inside = [f[c] > 0.0 for c in corners]
            if all(inside) or not any(inside):
                continue
            pts = []
            for a in range(4):
                b = (a + 1) % 4
                if inside[a] != inside[b]:
                    pts.append(edge_point(*corners[a], *corners[b]))
            if len(pts) == 2:
                segs.append((pts[0], pts[1]))
            elif len(pts) == 4:
                # saddle cell: split by the centre value
                centre = 0.25 * sum(f[c] for c in corners)
                if (centre > 0.0) == inside[0]:
                    segs.append((pts[0], pts[3]))
                    segs.append((pts[1], pts[2]))
                else:
                    segs.append((pts[0], pts[1]))
                    segs.append((pts[2], pts[3]))
    return np.asarray(segs)


def uy_trace(res, require_converged: bool = True) -> np.ndarray:
    """One-sided second-order u_y at every plane node."""
    _require_converged(res, require_converged)
    if res.mode == "slab":
        hy = res.field.ys[1] - res.field.ys[0]
        return np.array([one_sided_uy(res.field.data[None, :], hy)[0]])
    return one_sided_uy(res.field.data, res.field.grid.hy)


def directional_derivative_plane(res, e, require_converged: bool = True
                                 ) -> np.ndarray:
    """Plane directional derivative along the fixed unit vector e.

    Centered differences inside, one-sided second-order at the plane edge.
    For N = 1 and the axisymmetric trace, e is a scalar direction (+-1).
    """
    _require_converged(res, require_converged)
    grid = res.field.grid
    tr = res.field.data[..., -1]
    if res.mode == "axisym" or grid.plane_dim == 1:
        h = grid.hr if res.mode == "axisym" else grid.hx
        return float(e) * _d1(tr, h)
    e1, e2 = float(e[0]), float(e[1])
    d1 = np.apply_along_axis(_d1, 0, tr, grid.hx)
    d2 = np.apply_along_axis(_d1, 1, tr, grid.hx)
    return e1 * d1 + e2 * d2


def _d1(v, h):
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return out


def extract_free_boundary(res, level_factor: float = 1.0,
                          coincidence_tol: float | None = None,
                          plane_threshold: float | None = None,
                          require_converged: bool = True) -> FreeBoundary:
    """Assemble the full FreeBoundary record from a converged solve."""
    _require_converged(res, require_converged)
    level = level_factor * res.eps_final
    psi = extract_psi(res, level_factor, require_converged=False)
    mask, pts, suspect = extract_omega(
        res, level if plane_threshold is None else plane_threshold,
        require_converged=False)
    uy = uy_trace(res, require_converged=False)
    tol = res.params.tol if res.params is not None else 1e-8
    ctol = 10.0 * tol if coincidence_tol is None else coincidence_tol
    tr = res.field.data[..., -1]
    phi = res.phi_plane
    coinc = (tr - phi <= ctol) & (phi > 0.0)
    # count columns whose level crossing is ambiguous
    u = res.field.data
    cols = u.reshape(-1, u.shape[-1])
    multi = 0
    for k in range(cols.shape[0]):
        below = cols[k] < level
        this = int((below[:-1] & ~below[1:]).sum())
        if this > 1:
            multi += 1
    return FreeBoundary(
        psi=psi, omega_mask=mask, boundary_points=pts,
        coincidence_mask=coinc, uy_trace=uy, level_used=level,
        truncation_suspect=suspect, multi_crossing_columns=multi,
        mode=res.mode, grid=res.field.grid,
    )


def distance_to_boundary(fb: FreeBoundary, points) -> np.ndarray:
    """Exact distance from plane points to the extracted boundary.

    Point-to-point for N = 1 / axisym crossings, point-to-segment for the
    N = 2 contour.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=np.float64))
    if fb.boundary_points.size == 0:
        raise EmptyOmega("boundary is empty; cannot measure distances")
    if fb.mode == "axisym" or fb.psi.ndim == 1:
        b = fb.boundary_points.reshape(-1)
        return np.min(np.abs(pts[..., None] - b[None, :]), axis=-1)
    segs = fb.boundary_points
    pts2 = pts.reshape(-1, 2)
    out = np.full(pts2.shape[0], np.inf)
    for (p0, p1) in segs:
        p0 = np.asarray(p0)
        d = np.asarray(p1) - p0
        L2 = float(d @ d)
        if L2 == 0.0:
            t = np.zeros(pts2.shape[0])
        else:
            t = np.clip(((pts2 - p0) @ d) / L2, 0.0, 1.0)
        proj = p0[None, :] + t[:, None] * d[None, :]
        dist = np.sqrt(((pts2 - proj) ** 2).sum(axis=1))
        out = np.minimum(out, dist)
    return out.reshape(pts.shape[:-1] if pts.ndim > 1 else pts.shape)
