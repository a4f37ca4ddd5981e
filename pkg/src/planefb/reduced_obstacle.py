"""Reduced plane obstacle problem and the free boundary comparison.

Near the contact line the trace behaves like the solution of the classical
obstacle problem with source g(x) (the role played by the vertical flux):

    w >= 0,   -lap_x w + g >= 0,   w (-lap_x w + g) = 0

outside an inner Dirichlet contour, zero on the outer boundary.  The
pipeline builds g from the vertical-derivative trace of a full solve and
copies the inner data from its trace on the lattice cells crossing
|x| = 1 + rho0, then compares the two positivity boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import EmptyBoundary, GridMismatch, MaxItersExceeded
from .fb_extract import FreeBoundary

REDUCED_MAX_ITERS = 400_000


@dataclass
class ReducedProblem:
    """Plane complementarity problem with frozen Dirichlet nodes.

    xs: 1D node coordinates (shared per axis for the 2D case).
    g: source per plane node, shape (n,) or (n, n); must be >= 0 on the
       nodes actually solved (free nodes).
    fixed_mask: True where the value is held at fixed_values (inner
       contour and outer boundary).
    """

    xs: np.ndarray
    g: np.ndarray
    fixed_mask: np.ndarray
    fixed_values: np.ndarray

    def __post_init__(self):
        self.xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        self.g = np.ascontiguousarray(self.g, dtype=np.float64)
        self.fixed_mask = np.ascontiguousarray(self.fixed_mask, dtype=np.bool_)
        self.fixed_values = np.ascontiguousarray(self.fixed_values,
                                                 dtype=np.float64)
        if self.g.shape != self.fixed_mask.shape != self.fixed_values.shape:
            raise GridMismatch("g, fixed_mask, fixed_values shapes differ")
        if self.g.ndim not in (1, 2):
            raise ValueError("reduced problem supports 1D or 2D plane grids")
        free = ~self.fixed_mask
        if np.any(self.g[free] < 0):
            raise ValueError("source g must be >= 0 on free nodes")

    @property
    def h(self) -> float:
        return float(self.xs[1] - self.xs[0])


def build_reduced_from_solution(res, fb: FreeBoundary, ob) -> ReducedProblem:
    """Assemble the reduced problem from a converged full solve.

    g is the one-sided u_y trace clipped at 0; the inner contour freezes
    every node with |x| <= 1 + rho0 at the full trace value; the outer
    lattice boundary is frozen at 0.
    """
    grid = fb.grid
    if fb.mode == "axisym":
        raise ValueError("reduced comparison runs on Cartesian plane grids")
    tr = res.field.data[..., -1]
    g = np.maximum(fb.uy_trace, 0.0)
    if grid.plane_dim == 1:
        radii = np.abs(grid.xs)
        fixed = radii <= ob.support_radius
        fixed[0] = True
        fixed[-1] = True
        vals = np.where(fixed, tr, 0.0)
        vals[0] = 0.0
        vals[-1] = 0.0
        return ReducedProblem(grid.xs, g, fixed, vals)
    pts = grid.plane_points()
    radii = np.sqrt(pts[..., 0] ** 2 + pts[..., 1] ** 2)
    fixed = radii <= ob.support_radius
    fixed[0, :] = True
    fixed[-1, :] = True
    fixed[:, 0] = True
    fixed[:, -1] = True
    vals = np.where(radii <= ob.support_radius, tr, 0.0)
    return ReducedProblem(grid.xs, g, fixed, vals)


def solve_reduced(p: ReducedProblem, tol: float = 1e-10,
                  omega: float = 1.8, max_iters: int = REDUCED_MAX_ITERS
                  ) -> np.ndarray:
    """Projected SOR for the reduced complementarity system.

    Returns the plane field w; node-wise min(w, -lap_h w + g) <= tol at the
    free nodes on exit.  Raises MaxItersExceeded if the budget runs out.
    """
    w = p.fixed_values.copy()
    w[~p.fixed_mask] = 0.0
    fixed = p.fixed_mask.astype(np.uint8)
    ihx2 = 1.0 / p.h**2
    sweep = K.reduced_sweep_1d if p.g.ndim == 1 else K.reduced_sweep_2d
    resid = K.reduced_residual_1d if p.g.ndim == 1 else K.reduced_residual_2d
    it = 0
    while it < max_iters:
        for _ in range(8):
            sweep(w, p.g, fixed, ihx2, omega)
            it += 1
        if resid(w, p.g, fixed, ihx2) <= tol:
            return w
    raise MaxItersExceeded(
        f"reduced solve at {max_iters} sweeps, residual "
        f"{resid(w, p.g, fixed, ihx2):.3e} > tol {tol:.3e}")


def boundary_of_positivity(xs, w, threshold: float):
    """Crossing points of w = threshold (1D) or contour segments (2D)."""
    if w.ndim == 1:
        sign = w > threshold
        idx = np.nonzero(sign[:-1] != sign[1:])[0]
        pts = []
        for i in idx:
            t = (threshold - w[i]) / (w[i + 1] - w[i])
            pts.append(xs[i] + t * (xs[1] - xs[0]))
        return np.asarray(pts)
    from .fb_extract import _marching_squares
    return _marching_squares(xs, w, threshold)


def compare_boundaries(fb_full: FreeBoundary, w: np.ndarray,
                       threshold: float | None = None) -> dict:
    """Symmetric Hausdorff distance between the full-model boundary and
    the reduced positivity boundary, in grid-cell units.

    threshold defaults to the full extraction level, so both boundaries
    are level sets at the same height.
    """
    grid = fb_full.grid
    if fb_full.mode == "axisym":
        raise ValueError("reduced comparison runs on Cartesian plane grids")
    plane_shape = (grid.nx,) * grid.plane_dim
    if w.shape != plane_shape:
        raise GridMismatch(f"w shape {w.shape} != plane shape {plane_shape}")
    thr = fb_full.level_used if threshold is None else float(threshold)
    red_pts = boundary_of_positivity(grid.xs, w, thr)
    if fb_full.boundary_points.size == 0 or red_pts.size == 0:
        raise EmptyBoundary("one of the boundaries is empty")
    if w.ndim == 1:
        a = np.sort(fb_full.boundary_points.reshape(-1))
        b = np.sort(red_pts.reshape(-1))
        d_ab = np.abs(a[:, None] - b[None, :]).min(axis=1).max()
        d_ba = np.abs(b[:, None] - a[None, :]).min(axis=1).max()
        haus = max(float(d_ab), float(d_ba))
    else:
        a = _densify_segments(fb_full.boundary_points)
        b = _densify_segments(red_pts)
        d_ab = _point_set_hausdorff(a, b)
        d_ba = _point_set_hausdorff(b, a)
        haus = max(d_ab, d_ba)
    return {
        "hausdorff": haus, "hausdorff_cells": haus / grid.hx,
        "threshold": thr,
        "full_boundary_points": int(np.asarray(fb_full.boundary_points).size),
        "reduced_boundary_points": int(np.asarray(red_pts).size),
    }


def _densify_segments(segs, k: int = 5) -> np.ndarray:
    segs = np.asarray(segs, dtype=np.float64)
    t = np.linspace(0.0, 1.0, k)[None, :, None]
    pts = segs[:, 0:1, :] * (1 - t) + segs[:, 1:2, :] * t
    return pts.reshape(-1, 2)


def _point_set_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    out = 0.0
    for chunk in np.array_split(a, max(1, a.shape[0] // 512)):
        d = np.sqrt(((chunk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
        out = max(out, float(d.min(axis=1).max()))
    return out
