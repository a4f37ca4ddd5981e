"""Projected relaxation solvers and eps-continuation.

Two independent routes to the same discrete complementarity system:

  * PSOR: lexicographic nonlinear Gauss-Seidel sweeps.  Each interior node
    solves its scalar equation by guarded Newton (bisection fallback), each
    plane node solves the linear Wentzell row, both relaxed by omega, and
    the plane value is projected onto u >= phi.
  * PARABOLIC: explicit Euler on the gradient-flow form, plane projection
    after every step, marched until the time-derivative sup-norm drops
    below tol.

Continuation solves a geometric eps schedule, warm-starting every stage
from the previous solution; the auto schedule halves eps0 and finishes at
exactly 4*hy (layers thinner than that are unresolved).  Both solvers are
strictly deterministic: fixed sweep order, fixed step blocks, no threading.

max_iters counts sweeps for PSOR and time steps for PARABOLIC; leave it
None to get a method-appropriate default.  When the budget runs out the
best iterate is returned with converged=False and status MaxItersExceeded.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import operators
from .errors import InvalidSchedule
from .grid import AxisymField, AxisymGrid, Field, Grid
from .obstacle import ObstacleSpec, sample_plane

logger = logging.getLogger("planefb.solver")

_EMPTY_BREAKS = np.empty(0)
_EMPTY_COEFFS = np.empty((4, 0))

PSOR_DEFAULT_MAX_ITERS = 60_000
PARABOLIC_DEFAULT_MAX_STEPS = 6_000_000


@dataclass(frozen=True)
class SolveParams:
    """Solver knobs; defaults are the desk-scale configuration."""

    method: str = "PSOR"                # PSOR | PARABOLIC
    omega: float = 1.5                  # relaxation factor in (0, 2)
    tol: float = 1e-8                   # residual sup-norm target (1e-8 * max phi)
    max_iters: int | None = None        # sweeps (PSOR) / steps (PARABOLIC)
    eps0: float = 0.4                   # first eps of the auto schedule
    eps_factor: float = 0.5             # geometric ratio of the auto schedule
    eps_schedule: tuple | None = None   # explicit schedule overrides the auto one
    newton_inner: int = 3               # max Newton steps per node solve
    dt_safety: float = 0.9              # CFL fraction for PARABOLIC
    check_every: int = 8                # sweeps/step-pairs between residual checks
    energy_every: int = 64              # sweeps between energy diagnostics

    def __post_init__(self):
        if self.method not in ("PSOR", "PARABOLIC"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 < self.omega < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError("dt_safety must lie in (0, 1]")

    def resolved_max_iters(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return (PSOR_DEFAULT_MAX_ITERS if self.method == "PSOR"
                else PARABOLIC_DEFAULT_MAX_STEPS)


@dataclass
class SolveResult:
    """Converged field plus per-stage convergence records.

    residual_history holds one (k, 3) array per eps stage with rows
    (iteration, interior residual sup, complementarity residual sup);
    energy_history one (k, 2) array of (iteration, energy) rows.
    """

    field: object                       # Field | AxisymField | SlabColumn
    eps_final: float
    eps_schedule: tuple
    residual_history: list
    iterations: list
    energy_history: list
    converged: bool
    status: str = "Converged"
    phi_plane: np.ndarray | None = None
    obstacle: ObstacleSpec | None = None
    fam: object = None
    params: SolveParams | None = None
    mode: str = "cartesian"             # cartesian | axisym | slab
    fb_summary: list = field(default_factory=list)


@dataclass
class SlabColumn:
    """1D-in-y field used by the constant-obstacle test mode."""

    ys: np.ndarray
    data: np.ndarray
    plane_value: float

    @property
    def values(self) -> np.ndarray:
        return self.data


def _payload(fam):
    if fam is None:
        return -1, 0.0, _EMPTY_BREAKS, _EMPTY_COEFFS
    return fam.kernel_payload()


def build_eps_schedule(params: SolveParams, hy: float) -> tuple:
    """Geometric schedule ending at exactly 4*hy; everything >= 2*hy."""
    floor = 2.0 * hy
    if params.eps_schedule is not None:
        sched = tuple(float(e) for e in params.eps_schedule)
        if any(e < floor * (1.0 - 1e-12) for e in sched):
            raise InvalidSchedule(
                f"schedule entries must be >= 2*hy = {floor}, got {sched}")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise InvalidSchedule("schedule must decrease strictly")
        return sched
    target = 4.0 * hy
    if params.eps0 < floor * (1.0 - 1e-12):
        raise InvalidSchedule(
            f"eps0 = {params.eps0} below the resolvability floor 2*hy = {floor}")
    if params.eps0 <= target * (1.0 + 1e-12):
        return (params.eps0,)
    # geometric stages, then land exactly on 4*hy; stop the ladder early
    # enough that the final step is a genuine decrease (>= sqrt(1/factor))
    sched = [params.eps0]
    cut = target / np.sqrt(params.eps_factor)
    while sched[-1] * params.eps_factor > cut * (1.0 + 1e-12):
        sched.append(sched[-1] * params.eps_factor)
    sched.append(target)
    return tuple(sched)


def default_fill(grid, phi_plane: np.ndarray):
    """Feasible first iterate: phi(x) * max(0, 1 + y/L), zero on Dirichlet rows."""
    ramp = np.clip(1.0 + grid.ys / grid.spec.depth, 0.0, None)
    phi = np.maximum(phi_plane, 0.0)
    if isinstance(grid, AxisymGrid):
        u = phi[:, None] * ramp[None, :]
        u[-1, :] = 0.0
        u[:, 0] = 0.0
        return u
    if grid.plane_dim == 1:
        u = phi[:, None] * ramp[None, :]
        u[0, :] = 0.0
        u[-1, :] = 0.0
        u[:, 0] = 0.0
        return u
    u = phi[:, :, None] * ramp[None, None, :]
    u[0, :, :] = 0.0
    u[-1, :, :] = 0.0
    u[:, 0, :] = 0.0
    u[:, -1, :] = 0.0
    u[:, :, 0] = 0.0
    return u


def _phi_for(grid, ob):
    if ob is None:
        shape = (grid.nr,) if isinstance(grid, AxisymGrid) else \
            (grid.nx,) * grid.plane_dim
        return np.full(shape, -np.inf)
    return np.ascontiguousarray(sample_plane(ob, grid), dtype=np.float64)


def _grid_kernels(grid):
    """(sweep, residuals, parab_pair, extra_args) dispatch per grid type."""
    if isinstance(grid, AxisymGrid):
        extra = (grid.rs, float(grid.plane_dim), 1.0 / grid.hr,
                 1.0 / grid.hr**2, 1.0 / grid.hy**2, 1.0 / (2.0 * grid.hy))
        return K.psor_sweep_axisym, K.residuals_axisym, K.parab_pair_axisym, extra
    if grid.plane_dim == 1:
        extra = (1.0 / grid.hx**2, 1.0 / grid.hy**2, 1.0 / (2.0 * grid.hy))
        return K.psor_sweep_n1, K.residuals_n1, K.parab_pair_n1, extra
    extra = (1.0 / grid.hx**2, 1.0 / grid.hy**2, 1.0 / (2.0 * grid.hy))
    return K.psor_sweep_n2, K.residuals_n2, K.parab_pair_n2, extra


def _wrap_field(grid, u):
    if isinstance(grid, AxisymGrid):
        return AxisymField(grid, u)
    return Field(grid, u)


def _energy(grid, u, fam, eps) -> float:
    f = _wrap_field(grid, u)
    if isinstance(grid, AxisymGrid):
        return operators.axisym_energy(f, fam, eps)
    return operators.energy(f, fam, eps)


def psor_solve(grid, fam, ob, params: SolveParams, init=None,
               eps: float | None = None, stage: int = 0) -> SolveResult:
    """Projected nonlinear Gauss-Seidel at a single eps.

    init may be a Field/AxisymField or a raw array; infeasible plane traces
    are projected onto u >= phi before the first sweep.
    """
    eps = params.eps0 if eps is None else float(eps)
    phi = _phi_for(grid, ob)
    sweep, residuals, _, extra = _grid_kernels(grid)
    kind, scale, breaks, coeffs = _payload(fam)
    u = _init_array(grid, init, phi)
    hist = []
    ehist = []
    max_iters = params.resolved_max_iters()
    converged = False
    it = 0
    while it < max_iters:
        for _ in range(min(params.check_every, max_iters - it)):
            sweep(u, phi, *extra, eps, kind, scale, breaks, coeffs,
                  params.omega, params.newton_inner)
            it += 1
            if it % params.energy_every == 0:
                ehist.append((it, _energy(grid, u, fam, eps)))
        ri, rc = residuals(u, phi, *extra, eps, kind, scale, breaks, coeffs)
        hist.append((it, ri, rc))
        if max(ri, rc) <= params.tol:
            converged = True
            break
    ri, rc = hist[-1][1], hist[-1][2]
    logger.info("stage=%d eps=%.17g iter=%d res_int=%.3e res_comp=%.3e",
                stage, eps, it, ri, rc)
    ehist.append((it, _energy(grid, u, fam, eps)))
    _check_energy_monotone(ehist, params.tol)
    return SolveResult(
        field=_wrap_field(grid, u), eps_final=eps, eps_schedule=(eps,),
        residual_history=[np.array(hist)], iterations=[it],
        energy_history=[np.array(ehist)], converged=converged,
        status="Converged" if converged else "MaxItersExceeded",
        phi_plane=phi, obstacle=ob, fam=fam, params=params,
        mode="axisym" if isinstance(grid, AxisymGrid) else "cartesian",
    )


def parabolic_solve(grid, fam, ob, params: SolveParams, init=None,
                    eps: float | None = None, stage: int = 0) -> SolveResult:
    """Explicit relaxation to steady state with plane projection.

    Default initial data (init=None): phi on the plane, zero below.
    Termination: sup |u^{n+1} - u^n| / dt <= tol.
    """
    eps = params.eps0 if eps is None else float(eps)
    phi = _phi_for(grid, ob)
    _, residuals, pair, extra = _grid_kernels(grid)
    kind, scale, breaks, coeffs = _payload(fam)
    if init is None:
        u = np.zeros(grid.shape)
        u[..., -1] = np.maximum(phi, 0.0)
        if isinstance(grid, AxisymGrid):
            u[-1, -1] = 0.0
        elif grid.plane_dim == 1:
            u[0, -1] = 0.0
            u[-1, -1] = 0.0
        else:
            u[0, :, -1] = 0.0
            u[-1, :, -1] = 0.0
            u[:, 0, -1] = 0.0
            u[:, -1, -1] = 0.0
    else:
        u = _init_array(grid, init, phi)
    v = u.copy()
    ndim = grid.plane_dim
    hmin2 = min(getattr(grid, "hx", getattr(grid, "hr", None)) ** 2,
                grid.hy**2)
    dt = params.dt_safety * hmin2 / (2.0 * (ndim + 1))
    max_steps = params.resolved_max_iters()
    hist = []
    ehist = []
    steps = 0
    converged = False
    while steps < max_steps:
        maxdu = pair(u, v, phi, *extra, dt, eps, kind, scale, breaks, coeffs,
                     True)
        steps += 2
        if maxdu / dt <= params.tol:
            converged = True
            break
        if (steps // 2) % params.check_every == 0:
            ri, rc = residuals(u, phi, *extra, eps, kind, scale, breaks,
                               coeffs)
            hist.append((steps, ri, rc))
    ri, rc = residuals(u, phi, *extra, eps, kind, scale, breaks, coeffs)
    hist.append((steps, ri, rc))
    logger.info("stage=%d eps=%.17g iter=%d res_int=%.3e res_comp=%.3e",
                stage, eps, steps, ri, rc)
    ehist.append((steps, _energy(grid, u, fam, eps)))
    return SolveResult(
        field=_wrap_field(grid, u), eps_final=eps, eps_schedule=(eps,),
        residual_history=[np.array(hist)], iterations=[steps],
        energy_history=[np.array(ehist)], converged=converged,
        status="Converged" if converged else "MaxItersExceeded",
        phi_plane=phi, obstacle=ob, fam=fam, params=params,
        mode="axisym" if isinstance(grid, AxisymGrid) else "cartesian",
    )


def continuation_solve(grid, fam, ob, params: SolveParams) -> list:
    """Warm-started eps-continuation; returns one SolveResult per stage.

    Each stage's result aggregates the histories of all stages so far, so
    the last element is the eps -> 0 candidate with the full record.  A
    stage that fails to converge aborts the remaining stages.
    """
    sched = build_eps_schedule(params, grid.hy)
    solve = psor_solve if params.method == "PSOR" else parabolic_solve
    phi = _phi_for(grid, ob)
    u = default_fill(grid, phi)
    results = []
    agg_hist, agg_iters, agg_energy, agg_fb = [], [], [], []
    for k, eps in enumerate(sched):
        res = solve(grid, fam, ob, params, init=u, eps=eps, stage=k)
        agg_hist.extend(res.residual_history)
        agg_iters.extend(res.iterations)
        agg_energy.extend(res.energy_history)
        agg_fb.append(_fb_stage_summary(grid, res.field.data, eps))
        res.eps_schedule = tuple(sched[:k + 1])
        res.residual_history = list(agg_hist)
        res.iterations = list(agg_iters)
        res.energy_history = list(agg_energy)
        res.fb_summary = list(agg_fb)
        results.append(res)
        u = res.field.data
        if not res.converged:
            res.status = f"MaxItersExceeded(eps={eps:.17g})"
            break
    return results


def _fb_stage_summary(grid, u, eps) -> dict:
    """Per-stage plane positivity record for the continuation diagnostic."""
    tr = u[..., -1]
    mask = tr > eps
    out = {"eps": float(eps), "omega_nodes": int(mask.sum())}
    if isinstance(grid, AxisymGrid):
        rs = grid.rs
        out["omega_rmax"] = float(rs[mask].max()) if mask.any() else None
    elif grid.plane_dim == 1:
        xs = grid.xs
        out["omega_xmin"] = float(xs[mask].min()) if mask.any() else None
        out["omega_xmax"] = float(xs[mask].max()) if mask.any() else None
    return out


def _init_array(grid, init, phi):
    if init is None:
        u = default_fill(grid, phi)
    elif isinstance(init, (Field, AxisymField)):
        u = init.data.copy()
    else:
        u = np.array(init, dtype=np.float64, copy=True)
    if u.shape != grid.shape:
        raise ValueError(f"init shape {u.shape} != grid shape {grid.shape}")
    u = np.ascontiguousarray(u)
    tr = u[..., -1]
    np.maximum(tr, np.where(np.isfinite(phi), phi, -np.inf), out=tr)
    # keep Dirichlet rows exact
    if isinstance(grid, AxisymGrid):
        u[-1, :] = 0.0
        u[:, 0] = 0.0
    elif grid.plane_dim == 1:
        u[0, :] = 0.0
        u[-1, :] = 0.0
        u[:, 0] = 0.0
    else:
        u[0, :, :] = 0.0
        u[-1, :, :] = 0.0
        u[:, 0, :] = 0.0
        u[:, -1, :] = 0.0
        u[:, :, 0] = 0.0
    return u


def _check_energy_monotone(ehist, tol):
    """Log energy increases beyond tol-level fluctuation (diagnostic only)."""
    for (i0, e0), (i1, e1) in zip(ehist, ehist[1:]):
        if e1 > e0 + 10.0 * tol * max(1.0, abs(e0)):
            logger.warning("energy increase between sweeps %d and %d: %r -> %r",
                           i0, i1, e0, e1)


# ----------------------------------------------------------------------
# slab test mode: phi == M on the whole plane, solution 1D in y
# ----------------------------------------------------------------------


def slab_test_solve(fam, M: float, eps: float, depth: float, ny: int,
                    params: SolveParams) -> SolveResult:
    """Column solve of the constant-obstacle test problem.

    The plane equation reduces to u_y + complementarity against u >= M;
    since the converged u_y is positive the trace pins at M, and the bulk
    profile solves -u'' + beta_eps(u) = 0 with u(-L) = 0.  Cross-checked
    against the quadrature oracle in tests and acceptance.
    """
    ys = (np.arange(ny) - (ny - 1)) * (depth / (ny - 1))
    hy = depth / (ny - 1)
    if eps < 2.0 * hy * (1.0 - 1e-12):
        raise InvalidSchedule(f"eps = {eps} below the 2*hy floor {2 * hy}")
    kind, scale, breaks, coeffs = _payload(fam)
    ihy2, inv2hy = 1.0 / hy**2, 1.0 / (2.0 * hy)
    u = M * np.clip(1.0 + ys / depth, 0.0, None)
    u[0] = 0.0
    max_iters = params.resolved_max_iters()
    hist = []
    converged = False
    it = 0
    if params.method == "PSOR":
        while it < max_iters:
            for _ in range(min(params.check_every, max_iters - it)):
                K.psor_sweep_slab(u, M, ihy2, inv2hy, eps, kind, scale,
                                  breaks, coeffs, params.omega,
                                  params.newton_inner)
                it += 1
            ri, rc = K.residuals_slab(u, M, ihy2, inv2hy, eps, kind, scale,
                                      breaks, coeffs)
            hist.append((it, ri, rc))
            if max(ri, rc) <= params.tol:
                converged = True
                break
    else:
        v = u.copy()
        dt = params.dt_safety * hy**2 / 2.0
        while it < max_iters:
            maxdu = K.parab_pair_slab(u, v, M, ihy2, inv2hy, dt, eps, kind,
                                      scale, breaks, coeffs, True)
            it += 2
            if maxdu / dt <= params.tol:
                converged = True
                break
        ri, rc = K.residuals_slab(u, M, ihy2, inv2hy, eps, kind, scale,
                                  breaks, coeffs)
        hist.append((it, ri, rc))
    logger.info("stage=0 eps=%.17g iter=%d res_int=%.3e res_comp=%.3e",
                eps, it, hist[-1][1], hist[-1][2])
    return SolveResult(
        field=SlabColumn(ys=ys, data=u, plane_value=M), eps_final=eps,
        eps_schedule=(eps,), residual_history=[np.array(hist)],
        iterations=[it], energy_history=[np.empty((0, 2))],
        converged=converged,
        status="Converged" if converged else "MaxItersExceeded",
        phi_plane=np.array([M]), obstacle=None, fam=fam, params=params,
        mode="slab",
    )
