"""Numba kernels: lexicographic PSOR sweeps, explicit parabolic blocks,
fused residual norms, and the projected SOR for the reduced plane problem.

Everything here is serial with a fixed traversal order, so repeated runs
with identical inputs produce bitwise-identical iterates.  The penalty is
passed as (kind, scale, breaks, coeffs): kind -1 disables the reaction
term, kind 0 is the rational-cube closed form, kind 1 evaluates a
piecewise-cubic table (zero beyond the last break).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ----------------------------------------------------------------------
# penalty evaluation
# ----------------------------------------------------------------------


@njit(cache=True, inline="always")
def _beta(kind, scale, breaks, coeffs, s):
    if kind < 0 or s <= 0.0:
        return 0.0
    if kind == 0:
        q = 1.0 + s
        return scale * s / (q * q * q)
    if s >= breaks[breaks.shape[0] - 1]:
        return 0.0
    lo = 0
    hi = breaks.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if breaks[mid] <= s:
            lo = mid
        else:
            hi = mid
    t = s - breaks[lo]
    acc = 0.0
    for m in range(coeffs.shape[0]):
        acc = acc * t + coeffs[m, lo]
    return acc


@njit(cache=True, inline="always")
def _dbeta(kind, scale, breaks, coeffs, s):
    if kind < 0 or s <= 0.0:
        return 0.0
    if kind == 0:
        q = 1.0 + s
        q2 = q * q
        return scale * (1.0 - 2.0 * s) / (q2 * q2)
    if s >= breaks[breaks.shape[0] - 1]:
        return 0.0
    lo = 0
    hi = breaks.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if breaks[mid] <= s:
            lo = mid
        else:
            hi = mid
    t = s - breaks[lo]
    acc = 0.0
    deg = coeffs.shape[0] - 1
    for m in range(coeffs.shape[0] - 1):
        acc = acc * t + coeffs[m, lo] * (deg - m)
    return acc


@njit(cache=True, inline="always")
def _beta_eps(kind, scale, breaks, coeffs, v, eps):
    return _beta(kind, scale, breaks, coeffs, v / eps) / eps


@njit(cache=True, inline="always")
def _node_solve(d, S, vold, eps, kind, scale, breaks, coeffs, newton_inner):
    """Root of d*v - S + beta_eps(v) = 0; beta extended by 0 on v <= 0.

    beta_eps >= 0 and vanishes for v <= 0, so the root always lies in
    [min(0, S/d), max(0, S/d)]; Newton iterates are clipped into that
    bracket, with a bisection fallback if the slope degenerates.
    """
    if kind < 0:
        return S / d
    lo = S / d
    hi = lo
    if lo > 0.0:
        lo = 0.0
    else:
        hi = 0.0
    v = vold
    if v < lo:
        v = lo
    elif v > hi:
        v = hi
    inv_eps2 = 1.0 / (eps * eps)
    for _ in range(newton_inner):
        se = v / eps
        F = d * v - S + _beta(kind, scale, breaks, coeffs, se) / eps
        Fp = d + _dbeta(kind, scale, breaks, coeffs, se) * inv_eps2
        if Fp <= 0.25 * d:
            break
        vn = v - F / Fp
        if vn < lo:
            vn = lo
        elif vn > hi:
            vn = hi
        if abs(vn - v) <= 1e-15 * (1.0 + abs(vn)):
            return vn
        v = vn
    # verify; bisect if Newton did not settle
    F = d * v - S + _beta_eps(kind, scale, breaks, coeffs, v, eps)
    if abs(F) <= 1e-12 * d * (1.0 + abs(v)):
        return v
    a = lo
    b = hi
    for _ in range(80):
        m = 0.5 * (a + b)
        Fm = d * m - S + _beta_eps(kind, scale, breaks, coeffs, m, eps)
        if Fm > 0.0:
            b = m
        else:
            a = m
        if b - a <= 1e-16 * (1.0 + abs(b)):
            break
    return 0.5 * (a + b)


# ----------------------------------------------------------------------
# N = 1 Cartesian kernels, field shape (nx, ny), plane at j = ny-1
# ----------------------------------------------------------------------


@njit(cache=True)
def psor_sweep_n1(u, phi, ihx2, ihy2, inv2hy, eps, kind, scale, breaks,
                  coeffs, omega, newton_inner):
    nx, ny = u.shape
    d = 2.0 * ihx2 + 2.0 * ihy2
    dp = 2.0 * ihx2 + 3.0 * inv2hy
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            S = (u[i - 1, j] + u[i + 1, j]) * ihx2 \
                + (u[i, j - 1] + u[i, j + 1]) * ihy2
            v = _node_solve(d, S, u[i, j], eps, kind, scale, breaks, coeffs,
                            newton_inner)
            u[i, j] = u[i, j] + omega * (v - u[i, j])
        j = ny - 1
        S = (u[i - 1, j] + u[i + 1, j]) * ihx2 \
            + (4.0 * u[i, j - 1] - u[i, j - 2]) * inv2hy
        v = S / dp
        v = u[i, j] + omega * (v - u[i, j])
        if v < phi[i]:
            v = phi[i]
        u[i, j] = v


@njit(cache=True)
def residuals_n1(u, phi, ihx2, ihy2, inv2hy, eps, kind, scale, breaks, coeffs):
    nx, ny = u.shape
    res_int = 0.0
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            lap = (u[i - 1, j] - 2.0 * u[i, j] + u[i + 1, j]) * ihx2 \
                + (u[i, j - 1] - 2.0 * u[i, j] + u[i, j + 1]) * ihy2
            r = -lap + _beta_eps(kind, scale, breaks, coeffs, u[i, j], eps)
            if abs(r) > res_int:
                res_int = abs(r)
    res_comp = 0.0
    j = ny - 1
    for i in range(1, nx - 1):
        lapx = (u[i - 1, j] - 2.0 * u[i, j] + u[i + 1, j]) * ihx2
        uy = (3.0 * u[i, j] - 4.0 * u[i, j - 1] + u[i, j - 2]) * inv2hy
        pr = -lapx + uy
        c = u[i, j] - phi[i]
        r = c if c < pr else pr
        if abs(r) > res_comp:
            res_comp = abs(r)
    return res_int, res_comp


@njit(cache=True)
def parab_pair_n1(u, v, phi, ihx2, ihy2, inv2hy, dt, eps, kind, scale,
                  breaks, coeffs, compute_maxdu):
    """Two explicit Euler steps u -> v -> u; returns max|du| of the last."""
    nx, ny = u.shape
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            lap = (u[i - 1, j] - 2.0 * u[i, j] + u[i + 1, j]) * ihx2 \
                + (u[i, j - 1] - 2.0 * u[i, j] + u[i, j + 1]) * ihy2
            v[i, j] = u[i, j] + dt * (lap - _beta_eps(kind, scale, breaks,
                                                      coeffs, u[i, j], eps))
        j = ny - 1
        lapx = (u[i - 1, j] - 2.0 * u[i, j] + u[i + 1, j]) * ihx2
        uy = (3.0 * u[i, j] - 4.0 * u[i, j - 1] + u[i, j - 2]) * inv2hy
        w = u[i, j] + dt * (lapx - uy)
        if w < phi[i]:
            w = phi[i]
        v[i, j] = w
    maxdu = 0.0
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            lap = (v[i - 1, j] - 2.0 * v[i, j] + v[i + 1, j]) * ihx2 \
                + (v[i, j - 1] - 2.0 * v[i, j] + v[i, j + 1]) * ihy2
            w = v[i, j] + dt * (lap - _beta_eps(kind, scale, breaks, coeffs,
                                                v[i, j], eps))
            if compute_maxdu:
                du = abs(w - v[i, j])
                if du > maxdu:
                    maxdu = du
            u[i, j] = w
        j = ny - 1
        lapx = (v[i - 1, j] - 2.0 * v[i, j] + v[i + 1, j]) * ihx2
        uy = (3.0 * v[i, j] - 4.0 * v[i, j - 1] + v[i, j - 2]) * inv2hy
        w = v[i, j] + dt * (lapx - uy)
        if w < phi[i]:
            w = phi[i]
        if compute_maxdu:
            du = abs(w - v[i, j])
            if du > maxdu:
                maxdu = du
        u[i, j] = w
    return maxdu


# ----------------------------------------------------------------------
# N = 2 Cartesian kernels, field shape (nx, nx, ny)
# ----------------------------------------------------------------------


@njit(cache=True)
def psor_sweep_n2(u, phi, ihx2, ihy2, inv2hy, eps, kind, scale, breaks,
                  coeffs, omega, newton_inner):
    nx = u.shape[0]
    ny = u.shape[2]
    d = 4.0 * ihx2 + 2.0 * ihy2
    dp = 4.0 * ihx2 + 3.0 * inv2hy
    for i1 in range(1, nx - 1):
        for i2 in range(1, nx - 1):
            for j in range(1, ny - 1):
                S = (u[i1 - 1, i2, j] + u[i1 + 1, i2, j]
                     + u[i1, i2 - 1, j] + u[i1, i2 + 1, j]) * ihx2 \
                    + (u[i1, i2, j - 1] + u[i1, i2, j + 1]) * ihy2
                v = _node_solve(d, S, u[i1, i2, j], eps, kind, scale, breaks,
                                coeffs, newton_inner)
                u[i1, i2, j] = u[i1, i2, j] + omega * (v - u[i1, i2, j])
            j = ny - 1
            S = (u[i1 - 1, i2, j] + u[i1 + 1, i2, j]
                 + u[i1, i2 - 1, j] + u[i1, i2 + 1, j]) * ihx2 \
                + (4.0 * u[i1, i2, j - 1] - u[i1, i2, j - 2]) * inv2hy
            v = S / dp
            v = u[i1, i2, j] + omega * (v - u[i1, i2, j])
            if v < phi[i1, i2]:
                v = phi[i1, i2]
            u[i1, i2, j] = v


@njit(cache=True)
def residuals_n2(u, phi, ihx2, ihy2, inv2hy, eps, kind, scale, breaks, coeffs):
    nx = u.shape[0]
    ny = u.shape[2]
    res_int = 0.0
    for i1 in range(1, nx - 1):
        for i2 in range(1, nx - 1):
            for j in range(1, ny - 1):
                lap = (u[i1 - 1, i2, j] - 2.0 * u[i1, i2, j] + u[i1 + 1, i2, j]
                       + u[i1, i2 - 1, j] - 2.0 * u[i1, i2, j]
                       + u[i1, i2 + 1, j]) * ihx2 \
                    + (u[i1, i2, j - 1] - 2.0 * u[i1, i2, j]
                       + u[i1, i2, j + 1]) * ihy2
                r = -lap + _beta_eps(kind, scale, breaks, coeffs,
                                     u[i1, i2, j], eps)
                if abs(r) > res_int:
                    res_int = abs(r)
    res_comp = 0.0
    j = ny - 1
    for i1 in range(1, nx - 1):
        for i2 in range(1, nx - 1):
            lapx = (u[i1 - 1, i2, j] - 2.0 * u[i1, i2, j] + u[i1 + 1, i2, j]
                    + u[i1, i2 - 1, j] - 2.0 * u[i1, i2, j]
                    + u[i1, i2 + 1, j]) * ihx2
            uy = (3.0 * u[i1, i2, j] - 4.0 * u[i1, i2, j - 1]
                  + u[i1, i2, j - 2]) * inv2hy
            pr = -lapx + uy
            c = u[i1, i2, j] - phi[i1, i2]
            r = c if c < pr else pr
            if abs(r) > res_comp:
                res_comp = abs(r)
    return res_int, res_comp


@njit(cache=True)
def parab_pair_n2(u, v, phi, ihx2, ihy2, inv2hy, dt, eps, kind, scale,
                  breaks, coeffs, compute_maxdu):
    nx = u.shape[0]
    ny = u.shape[2]
    maxdu = 0.0
    for swap in range(2):
        a = u if swap == 0 else v
        b = v if swap == 0 else u
        last = compute_maxdu and swap == 1
        for i1 in range(1, nx - 1):
            for i2 in range(1, nx - 1):
                for j in range(1, ny - 1):
                    lap = (a[i1 - 1, i2, j] - 2.0 * a[i1, i2, j]
                           + a[i1 + 1, i2, j] + a[i1, i2 - 1, j]
                           - 2.0 * a[i1, i2, j] + a[i1, i2 + 1, j]) * ihx2 \
                        + (a[i1, i2, j - 1] - 2.0 * a[i1, i2, j]
                           + a[i1, i2, j + 1]) * ihy2
                    w = a[i1, i2, j] + dt * (lap - _beta_eps(
                        kind, scale, breaks, coeffs, a[i1, i2, j], eps))
                    if last:
                        du = abs(w - a[i1, i2, j])
                        if du > maxdu:
                            maxdu = du
                    b[i1, i2, j] = w
                j = ny - 1
                lapx = (a[i1 - 1, i2, j] - 2.0 * a[i1, i2, j]
                        + a[i1 + 1, i2, j] + a[i1, i2 - 1, j]
                        - 2.0 * a[i1, i2, j] + a[i1, i2 + 1, j]) * ihx2
                uy = (3.0 * a[i1, i2, j] - 4.0 * a[i1, i2, j - 1]
                      + a[i1, i2, j - 2]) * inv2hy
                w = a[i1, i2, j] + dt * (lapx - uy)
                if w < phi[i1, i2]:
                    w = phi[i1, i2]
                if last:
                    du = abs(w - a[i1, i2, j])
                    if du > maxdu:
                        maxdu = du
                b[i1, i2, j] = w
    return maxdu


# ----------------------------------------------------------------------
# axisymmetric kernels, field shape (nr, ny), axis at i = 0
# ----------------------------------------------------------------------


@njit(cache=True)
def psor_sweep_axisym(u, phi, rs, ndim, ihr, ihr2, ihy2, inv2hy, eps, kind,
                      scale, breaks, coeffs, omega, newton_inner):
    nr, ny = u.shape
    for i in range(0, nr - 1):
        if i == 0:
            wW = 0.0
            wE = 2.0 * ndim * ihr2
            dr = 2.0 * ndim * ihr2
        else:
            rc = (ndim - 1.0) / (2.0 * rs[i]) * ihr
            wW = ihr2 - rc
            wE = ihr2 + rc
            dr = 2.0 * ihr2
        d = dr + 2.0 * ihy2
        dp = dr + 3.0 * inv2hy
        for j in range(1, ny - 1):
            S = (wW * u[i - 1, j] if i > 0 else 0.0) + wE * u[i + 1, j] \
                + (u[i, j - 1] + u[i, j + 1]) * ihy2
            v = _node_solve(d, S, u[i, j], eps, kind, scale, breaks, coeffs,
                            newton_inner)
            u[i, j] = u[i, j] + omega * (v - u[i, j])
        j = ny - 1
        S = (wW * u[i - 1, j] if i > 0 else 0.0) + wE * u[i + 1, j] \
            + (4.0 * u[i, j - 1] - u[i, j - 2]) * inv2hy
        v = S / dp
        v = u[i, j] + omega * (v - u[i, j])
        if v < phi[i]:
            v = phi[i]
        u[i, j] = v


@njit(cache=True, inline="always")
def _rad_op(a, i, j, rs, ndim, ihr, ihr2):
    if i == 0:
        return 2.0 * ndim * (a[1, j] - a[0, j]) * ihr2
    return (a[i - 1, j] - 2.0 * a[i, j] + a[i + 1, j]) * ihr2 \
        + (ndim - 1.0) / rs[i] * (a[i + 1, j] - a[i - 1, j]) * 0.5 * ihr


@njit(cache=True)
def residuals_axisym(u, phi, rs, ndim, ihr, ihr2, ihy2, inv2hy, eps, kind,
                     scale, breaks, coeffs):
    nr, ny = u.shape
    res_int = 0.0
    for i in range(0, nr - 1):
        for j in range(1, ny - 1):
            rad = _rad_op(u, i, j, rs, ndim, ihr, ihr2)
            lap = rad + (u[i, j - 1] - 2.0 * u[i, j] + u[i, j + 1]) * ihy2
            r = -lap + _beta_eps(kind, scale, breaks, coeffs, u[i, j], eps)
            if abs(r) > res_int:
                res_int = abs(r)
    res_comp = 0.0
    j = ny - 1
    for i in range(0, nr - 1):
        rad = _rad_op(u, i, j, rs, ndim, ihr, ihr2)
        uy = (3.0 * u[i, j] - 4.0 * u[i, j - 1] + u[i, j - 2]) * inv2hy
        pr = -rad + uy
        c = u[i, j] - phi[i]
        r = c if c < pr else pr
        if abs(r) > res_comp:
            res_comp = abs(r)
    return res_int, res_comp


@njit(cache=True)
def parab_pair_axisym(u, v, phi, rs, ndim, ihr, ihr2, ihy2, inv2hy, dt, eps,
                      kind, scale, breaks, coeffs, compute_maxdu):
    nr, ny = u.shape
    maxdu = 0.0
    for swap in range(2):
        a = u if swap == 0 else v
        b = v if swap == 0 else u
        last = compute_maxdu and swap == 1
        for i in range(0, nr - 1):
            for j in range(1, ny - 1):
                rad = _rad_op(a, i, j, rs, ndim, ihr, ihr2)
                lap = rad + (a[i, j - 1] - 2.0 * a[i, j] + a[i, j + 1]) * ihy2
                w = a[i, j] + dt * (lap - _beta_eps(kind, scale, breaks,
                                                    coeffs, a[i, j], eps))
                if last:
                    du = abs(w - a[i, j])
                    if du > maxdu:
                        maxdu = du
                b[i, j] = w
            j = ny - 1
            rad = _rad_op(a, i, j, rs, ndim, ihr, ihr2)
            w = a[i, j] + dt * (rad - ((3.0 * a[i, j] - 4.0 * a[i, j - 1]
                                        + a[i, j - 2]) * inv2hy))
            if w < phi[i]:
                w = phi[i]
            if last:
                du = abs(w - a[i, j])
                if du > maxdu:
                    maxdu = du
            b[i, j] = w
    return maxdu


# ----------------------------------------------------------------------
# slab (1D column in y) kernels for the constant-obstacle test mode
# ----------------------------------------------------------------------


@njit(cache=True)
def psor_sweep_slab(u, M, ihy2, inv2hy, eps, kind, scale, breaks, coeffs,
                    omega, newton_inner):
    ny = u.shape[0]
    d = 2.0 * ihy2
    for j in range(1, ny - 1):
        S = (u[j - 1] + u[j + 1]) * ihy2
        v = _node_solve(d, S, u[j], eps, kind, scale, breaks, coeffs,
                        newton_inner)
        u[j] = u[j] + omega * (v - u[j])
    j = ny - 1
    v = (4.0 * u[j - 1] - u[j - 2]) / 3.0
    v = u[j] + omega * (v - u[j])
    if v < M:
        v = M
    u[j] = v


@njit(cache=True)
def residuals_slab(u, M, ihy2, inv2hy, eps, kind, scale, breaks, coeffs):
    ny = u.shape[0]
    res_int = 0.0
    for j in range(1, ny - 1):
        lap = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * ihy2
        r = -lap + _beta_eps(kind, scale, breaks, coeffs, u[j], eps)
        if abs(r) > res_int:
            res_int = abs(r)
    j = ny - 1
    uy = (3.0 * u[j] - 4.0 * u[j - 1] + u[j - 2]) * inv2hy
    c = u[j] - M
    r = c if c < uy else uy
    res_comp = abs(r)
    return res_int, res_comp


@njit(cache=True)
def parab_pair_slab(u, v, M, ihy2, inv2hy, dt, eps, kind, scale, breaks,
                    coeffs, compute_maxdu):
    ny = u.shape[0]
    maxdu = 0.0
    for swap in range(2):
        a = u if swap == 0 else v
        b = v if swap == 0 else u
        last = compute_maxdu and swap == 1
        for j in range(1, ny - 1):
            lap = (a[j - 1] - 2.0 * a[j] + a[j + 1]) * ihy2
            w = a[j] + dt * (lap - _beta_eps(kind, scale, breaks, coeffs,
                                             a[j], eps))
            if last:
                du = abs(w - a[j])
                if du > maxdu:
                    maxdu = du
            b[j] = w
        j = ny - 1
        uy = (3.0 * a[j] - 4.0 * a[j - 1] + a[j - 2]) * inv2hy
        w = a[j] - dt * uy
        if w < M:
            w = M
        if last:
            du = abs(w - a[j])
            if du > maxdu:
                maxdu = du
        b[j] = w
    return maxdu


# ----------------------------------------------------------------------
# reduced plane obstacle problem: projected SOR with a frozen mask
# ----------------------------------------------------------------------


@njit(cache=True)
def reduced_sweep_1d(w, g, fixed, ihx2, omega):
    n = w.shape[0]
    for i in range(1, n - 1):
        if fixed[i]:
            continue
        v = 0.5 * (w[i - 1] + w[i + 1] - g[i] / ihx2)
        v = w[i] + omega * (v - w[i])
        if v < 0.0:
            v = 0.0
        w[i] = v


@njit(cache=True)
def reduced_residual_1d(w, g, fixed, ihx2):
    n = w.shape[0]
    res = 0.0
    for i in range(1, n - 1):
        if fixed[i]:
            continue
        r = -(w[i - 1] - 2.0 * w[i] + w[i + 1]) * ihx2 + g[i]
        c = w[i] if w[i] < r else r
        if abs(c) > res:
            res = abs(c)
    return res


@njit(cache=True)
def reduced_sweep_2d(w, g, fixed, ihx2, omega):
    n1, n2 = w.shape
    for i in range(1, n1 - 1):
        for k in range(1, n2 - 1):
            if fixed[i, k]:
                continue
            v = 0.25 * (w[i - 1, k] + w[i + 1, k] + w[i, k - 1] + w[i, k + 1]
                        - g[i, k] / ihx2)
            v = w[i, k] + omega * (v - w[i, k])
            if v < 0.0:
                v = 0.0
            w[i, k] = v


@njit(cache=True)
def reduced_residual_2d(w, g, fixed, ihx2):
    n1, n2 = w.shape
    res = 0.0
    for i in range(1, n1 - 1):
        for k in range(1, n2 - 1):
            if fixed[i, k]:
                continue
            r = -(w[i - 1, k] - 2.0 * w[i, k] + w[i + 1, k]) * ihx2 \
                - (w[i, k - 1] - 2.0 * w[i, k] + w[i, k + 1]) * ihx2 + g[i, k]
            c = w[i, k] if w[i, k] < r else r
            if abs(c) > res:
                res = abs(c)
    return res
