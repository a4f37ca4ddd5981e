"""Independent reference solutions used to test the solvers.

Three oracles, each built by a route disjoint from the grid solvers:

  * slab_exact: the closed-form planar solution (y + M)^+.
  * ode1d_penalized: the 1D penalized profile from the first integral
    u'^2 / 2 = B_eps(u), inverted by adaptive quadrature of
    y(u) = -int_u^M dv / sqrt(2 B_eps(v)) and monotone interpolation.
    Its plane slope sqrt(2 B_eps(M)) is the arbiter of the penalty mass:
    mass = 1/2 is the unique choice with slope -> 1.
  * brute_obstacle_1d: exact small-instance complementarity solve by
    enumerating all active sets.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator

from .errors import NoFeasibleActiveSet, QuadratureFailure


def slab_exact(M: float, point) -> float:
    """Planar free-boundary solution (y + M)^+ at point (x..., y)."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    y = point[-1] if np.ndim(point) else float(point)
    return max(y + M, 0.0)


@dataclass
class OracleProfile:
    """Quadrature profile of the 1D penalized problem.

    samples holds (y, u) rows at the requested y locations; table_y/table_u
    is the dense internal table the interpolant was built from.
    """

    M: float
    eps: float
    samples: np.ndarray
    slope_at_plane: float
    table_y: np.ndarray
    table_u: np.ndarray

    def evaluate(self, y):
        """Interpolated u(y) for y <= 0; zero below the resolved tail."""
        y = np.asarray(y, dtype=np.float64)
        interp = PchipInterpolator(self.table_y, self.table_u,
                                   extrapolate=False)
        out = interp(np.minimum(y, 0.0))
        out = np.where(y >= self.table_y[-1], self.M, out)
        return np.where(np.isnan(out), 0.0, out)


def ode1d_penalized(fam, M: float, eps: float, y_samples) -> OracleProfile:
    """Profile of -u'' + beta_eps(u) = 0, u(0) = M, decay at y -> -inf.

    Integrates ds / sqrt(2 B(s)) in the rescaled variable s = v / eps on a
    geometric ladder from s = M/eps downward, each rung by adaptive
    quadrature (abs tolerance 1e-12), until the accumulated depth covers
    the requested samples; u below the resolved tail is returned as 0.
    """
    if not (M > 0 and eps > 0):
        raise ValueError("need M > 0 and eps > 0")
    y_samples = np.asarray(y_samples, dtype=np.float64)
    if np.any(y_samples > 0):
        raise ValueError("profile is defined on y <= 0")
    ymin = float(y_samples.min()) if y_samples.size else -2.0 * eps

    def integrand_log(t):
        # substitution s = exp(t) keeps the integrand O(1) down the tail
        s = np.exp(t)
        return s / np.sqrt(2.0 * fam.B(s))

    s_top = M / eps
    step = 0.05  # rung height in log s
    ss = [s_top]
    ys = [0.0]
    total = 0.0
    err_total = 0.0
    t_cur = np.log(s_top)
    floor_t = -660.0  # exp(-660) ~ 1e-287
    margin = 0.25 + eps
    with warnings.catch_warnings():
        # the roundoff heuristic fires near machine precision on these
        # analytic rungs; the accumulated error budget below is the gate
        warnings.simplefilter("ignore", IntegrationWarning)
        while ys[-1] > ymin - margin and t_cur > floor_t:
            t_next = t_cur - step
            val, err = quad(integrand_log, t_next, t_cur, epsabs=1e-12,
                            epsrel=1e-10, limit=200)
            if not np.isfinite(val) or err > 1e-8:
                raise QuadratureFailure(
                    f"quadrature stalled on log-rung [{t_next}, {t_cur}]: "
                    f"err={err}")
            total += val
            err_total += err
            t_cur = t_next
            ss.append(np.exp(t_cur))
            ys.append(-eps * total)
    if err_total * eps > 1e-8:
        raise QuadratureFailure(
            f"accumulated quadrature error {err_total * eps} above 1e-8")
    table_y = np.asarray(ys[::-1])
    table_u = eps * np.asarray(ss[::-1])
    slope = float(np.sqrt(2.0 * fam.B_eps(M, eps)))
    prof = OracleProfile(M=M, eps=eps, samples=np.empty((0, 2)),
                         slope_at_plane=slope, table_y=table_y,
                         table_u=table_u)
    u_vals = prof.evaluate(y_samples)
    prof.samples = np.column_stack([y_samples, u_vals])
    return prof


def brute_obstacle_1d(g, dirichlet, h: float = 1.0) -> np.ndarray:
    """Exact 1D obstacle complementarity solve by active-set enumeration.

    Interior nodes i = 1..n carry sources g (length n); the returned array
    has length n + 2 with the Dirichlet pair at the ends.  Each of the 2^n
    candidate active sets (w = 0 there) is solved linearly and checked for
    w >= 0 and residual -lap_h w + g >= 0 at the active nodes; the first
    feasible candidate is returned.
    """
    g = np.asarray(g, dtype=np.float64)
    n = g.size
    if n > 20:
        raise ValueError(f"enumeration limited to n <= 20 nodes, got {n}")
    wl, wr = float(dirichlet[0]), float(dirichlet[1])
    ih2 = 1.0 / h**2
    ftol = 1e-11
    for mask in range(2**n):
        active = [(mask >> i) & 1 == 1 for i in range(n)]
        free = [i for i in range(n) if not active[i]]
        w = np.zeros(n + 2)
        w[0], w[-1] = wl, wr
        if free:
            m = len(free)
            A = np.zeros((m, m))
            b = np.zeros(m)
            pos = {node: k for k, node in enumerate(free)}
            for k, node in enumerate(free):
                A[k, k] = 2.0 * ih2
                b[k] = -g[node]
                for nb in (node - 1, node + 1):
                    if nb == -1:
                        b[k] += wl * ih2
                    elif nb == n:
                        b[k] += wr * ih2
                    elif not active[nb]:
                        A[k, pos[nb]] -= ih2
                    # active neighbour contributes 0
            try:
                sol = np.linalg.solve(A, b)
            except np.linalg.LinAlgError:
                continue
            for k, node in enumerate(free):
                w[node + 1] = sol[k]
            if np.any(sol < -ftol):
                continue
        feasible = True
        for i in range(n):
            if active[i]:
                r = -(w[i] - 2.0 * w[i + 1] + w[i + 2]) * ih2 + g[i]
                if r < -ftol:
                    feasible = False
                    break
        if feasible:
            return w
    raise NoFeasibleActiveSet("no active set satisfies complementarity")
