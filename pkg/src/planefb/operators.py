"""Discrete residuals of the coupled system.

Interior (y < 0, strictly inside the box):

    -lap_h u + beta_eps(u)

with the (2N+2)-point centered Laplacian.  Plane row (j = ny-1):

    -lap_{x,h} u + D_y u,    D_y u = (3 u_j - 4 u_{j-1} + u_{j-2}) / (2 hy)

(one-sided, second order; exact on y-quadratics).  Where the trace is
constrained by the obstacle, the residual of record is the complementarity
form min(u - phi, plane residual): it vanishes iff the Wentzell equation
holds wherever the trace detaches and the trace never dips below phi.

All stencils are exact on per-variable quadratics (beta disabled).
Returned arrays are full-shaped with zeros at nodes outside the stated set
(Dirichlet rows and the lateral plane boundary), so sup-norms can be taken
directly.
"""

from __future__ import annotations

import numpy as np

from .errors import GridTooShallow
from .grid import AxisymField, AxisymGrid, Field

# value below which a constrained plane node counts as touching in the
# min-form; kept 0 here, solver tolerances live in the solver module
__all__ = [
    "interior_residual",
    "plane_residual",
    "complementarity_residual",
    "axisym_interior_residual",
    "axisym_plane_residual",
    "one_sided_uy",
    "energy",
]


def _beta_term(fam, eps, u):
    if fam is None:
        return 0.0
    # solver convention: beta vanishes on u <= 0
    return fam.beta_eps(np.maximum(u, 0.0), eps)


def interior_residual(f: Field, fam=None, eps: float = 1.0) -> np.ndarray:
    """-lap_h u + beta_eps(u) at strictly interior nodes; fam=None drops beta."""
    g = f.grid
    u = f.data
    out = np.zeros_like(u)
    ihx2, ihy2 = 1.0 / g.hx**2, 1.0 / g.hy**2
    if g.plane_dim == 1:
        c = u[1:-1, 1:-1]
        lap = (u[2:, 1:-1] - 2 * c + u[:-2, 1:-1]) * ihx2 \
            + (u[1:-1, 2:] - 2 * c + u[1:-1, :-2]) * ihy2
        out[1:-1, 1:-1] = -lap + _beta_term(fam, eps, c)
    else:
        c = u[1:-1, 1:-1, 1:-1]
        lap = (u[2:, 1:-1, 1:-1] - 2 * c + u[:-2, 1:-1, 1:-1]) * ihx2 \
            + (u[1:-1, 2:, 1:-1] - 2 * c + u[1:-1, :-2, 1:-1]) * ihx2 \
            + (u[1:-1, 1:-1, 2:] - 2 * c + u[1:-1, 1:-1, :-2]) * ihy2
        out[1:-1, 1:-1, 1:-1] = -lap + _beta_term(fam, eps, c)
    return out


def one_sided_uy(data: np.ndarray, hy: float) -> np.ndarray:
    """Second-order one-sided normal derivative at the plane slice."""
    if data.shape[-1] < 3:
        raise GridTooShallow("one-sided u_y stencil needs ny >= 3")
    return (3.0 * data[..., -1] - 4.0 * data[..., -2] + data[..., -3]) / (2.0 * hy)


def plane_residual(f: Field) -> np.ndarray:
    """-lap_{x,h} u + u_y on the plane; zeros on the lateral plane boundary."""
    g = f.grid
    if g.ny < 3:
        raise GridTooShallow("plane residual needs ny >= 3")
    u = f.data
    tr = u[..., -1]
    uy = one_sided_uy(u, g.hy)
    out = np.zeros_like(tr)
    ihx2 = 1.0 / g.hx**2
    if g.plane_dim == 1:
        lapx = (tr[2:] - 2 * tr[1:-1] + tr[:-2]) * ihx2
        out[1:-1] = -lapx + uy[1:-1]
    else:
        lapx = (tr[2:, 1:-1] - 2 * tr[1:-1, 1:-1] + tr[:-2, 1:-1]) * ihx2 \
             + (tr[1:-1, 2:] - 2 * tr[1:-1, 1:-1] + tr[1:-1, :-2]) * ihx2
        out[1:-1, 1:-1] = -lapx + uy[1:-1, 1:-1]
    return out


def complementarity_residual(f: Field, phi_plane: np.ndarray) -> np.ndarray:
    """min(u - phi, plane residual) per plane node.

    phi_plane is the obstacle sampled on the plane nodes (obstacle.sample_plane).
    Zero rows of plane_residual (lateral boundary) stay excluded.
    """
    g = f.grid
    tr = f.data[..., -1]
    pr = plane_residual(f)
    out = np.minimum(tr - phi_plane, pr)
    if g.plane_dim == 1:
        out[0] = 0.0
        out[-1] = 0.0
    else:
        out[0, :] = 0.0
        out[-1, :] = 0.0
        out[:, 0] = 0.0
        out[:, -1] = 0.0
    return out


# ----------------------------------------------------------------------
# cylindrical (axisymmetric) variants on (r, y) grids
# ----------------------------------------------------------------------


def _radial_laplacian(u: np.ndarray, grid: AxisymGrid, plane_dim: int,
                      j_slice) -> np.ndarray:
    """u_rr + (N-1)/r u_r on rows i = 0..nr-2 of the given y-slice."""
    hr = grid.hr
    rs = grid.rs
    n = plane_dim
    v = u[:, j_slice]
    out = np.zeros_like(v)
    # symmetry stencil at the axis: 2N (u(h) - u(0)) / h^2
    out[0] = 2.0 * n * (v[1] - v[0]) / hr**2
    rr = (v[2:] - 2 * v[1:-1] + v[:-2]) / hr**2
    rfac = (n - 1) / rs[1:-1]
    if v.ndim == 2:
        rfac = rfac[:, None]
    rd = (v[2:] - v[:-2]) / (2.0 * hr)
    out[1:-1] = rr + rfac * rd
    return out


def axisym_interior_residual(f: AxisymField, fam=None, eps: float = 1.0,
                             plane_dim: int | None = None) -> np.ndarray:
    """-lap_cyl u + beta_eps(u) at interior nodes (r < R, -L < y < 0)."""
    g = f.grid
    n = g.plane_dim if plane_dim is None else plane_dim
    u = f.data
    out = np.zeros_like(u)
    ihy2 = 1.0 / g.hy**2
    rad = _radial_laplacian(u, g, n, slice(1, g.ny - 1))
    yy = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) * ihy2
    lap = rad[:-1] + yy[:-1]
    out[:-1, 1:-1] = -lap + _beta_term(fam, eps, u[:-1, 1:-1])
    return out


def axisym_plane_residual(f: AxisymField, plane_dim: int | None = None) -> np.ndarray:
    """-(u_rr + (N-1)/r u_r) + u_y on the plane row; zero at r = R."""
    g = f.grid
    if g.ny < 3:
        raise GridTooShallow("plane residual needs ny >= 3")
    n = g.plane_dim if plane_dim is None else plane_dim
    u = f.data
    uy = one_sided_uy(u, g.hy)
    rad = _radial_laplacian(u, g, n, g.ny - 1)
    out = np.zeros(g.nr)
    out[:-1] = -rad[:-1] + uy[:-1]
    return out


def axisym_complementarity_residual(f: AxisymField, phi_plane: np.ndarray,
                                    plane_dim: int | None = None) -> np.ndarray:
    tr = f.data[:, -1]
    pr = axisym_plane_residual(f, plane_dim)
    out = np.minimum(tr - phi_plane, pr)
    out[-1] = 0.0
    return out


# ----------------------------------------------------------------------
# energy diagnostic
# ----------------------------------------------------------------------


def energy(f: Field, fam=None, eps: float = 1.0) -> float:
    """Descent diagnostic: (1/2)|grad u|^2 + B_eps(u) over the box plus
    (1/2)|grad_x u(.,0)|^2 over the plane.

    The gradient terms carry the 1/2 that makes the stated PDE the formal
    Euler-Lagrange equation; forward-difference quadrature on cell edges,
    trapezoid weights on the nodal B term.
    """
    g = f.grid
    u = f.data
    hx, hy = g.hx, g.hy
    if g.plane_dim == 1:
        cell = hx * hy
        ex = ((u[1:, :] - u[:-1, :]) / hx) ** 2
        ey = ((u[:, 1:] - u[:, :-1]) / hy) ** 2
        grad = 0.5 * (ex.sum() + ey.sum()) * cell
        if fam is not None:
            w = np.ones_like(u)
            w[0, :] *= 0.5
            w[-1, :] *= 0.5
            w[:, 0] *= 0.5
            w[:, -1] *= 0.5
            bterm = float((fam.B_eps(np.maximum(u, 0.0), eps) * w).sum()) * cell
        else:
            bterm = 0.0
        tr = u[:, -1]
        surf = 0.5 * (((tr[1:] - tr[:-1]) / hx) ** 2).sum() * hx
        return float(grad + bterm + surf)
    cell = hx * hx * hy
    e1 = ((u[1:, :, :] - u[:-1, :, :]) / hx) ** 2
    e2 = ((u[:, 1:, :] - u[:, :-1, :]) / hx) ** 2
    ey = ((u[:, :, 1:] - u[:, :, :-1]) / hy) ** 2
    grad = 0.5 * (e1.sum() + e2.sum() + ey.sum()) * cell
    if fam is not None:
        bterm = float(fam.B_eps(np.maximum(u, 0.0), eps).sum()) * cell
    else:
        bterm = 0.0
    tr = u[:, :, -1]
    s1 = ((tr[1:, :] - tr[:-1, :]) / hx) ** 2
    s2 = ((tr[:, 1:] - tr[:, :-1]) / hx) ** 2
    surf = 0.5 * (s1.sum() + s2.sum()) * hx * hx
    return float(grad + bterm + surf)


def axisym_energy(f: AxisymField, fam=None, eps: float = 1.0) -> float:
    """Energy diagnostic in cylindrical measure r^(N-1) dr dy.

    Same halved-gradient convention as energy(); the angular factor is
    omitted (it rescales all stages alike).
    """
    g = f.grid
    u = f.data
    hr, hy = g.hr, g.hy
    n = g.plane_dim
    rmid = (0.5 * (g.rs[1:] + g.rs[:-1])) ** (n - 1)
    rnode = g.rs ** (n - 1) if n > 1 else np.ones_like(g.rs)
    er = ((u[1:, :] - u[:-1, :]) / hr) ** 2 * rmid[:, None]
    ey = ((u[:, 1:] - u[:, :-1]) / hy) ** 2 * rnode[:, None]
    grad = 0.5 * (er.sum() + ey.sum()) * hr * hy
    if fam is not None:
        bterm = float((fam.B_eps(np.maximum(u, 0.0), eps)
                       * rnode[:, None]).sum()) * hr * hy
    else:
        bterm = 0.0
    tr = u[:, -1]
    surf = 0.5 * (((tr[1:] - tr[:-1]) / hr) ** 2 * rmid).sum() * hr
    return float(grad + bterm + surf)
