"""Penalty family beta, its eps-scaling, and the primitive B.

The reaction term concentrates at scale eps through

    beta_eps(u) = (1/eps) * beta(u/eps),       B_eps(u) = B(u/eps),

with B the primitive of beta.  The total mass m = integral of beta over
[0, inf) controls the limiting gradient on the free surface: the 1D first
integral u'^2 / 2 = B_eps(u) gives slope sqrt(2 m) far above the layer, so
m = 1/2 reproduces |grad u| = 1.  The mass is configurable; the oracle
module measures the slope produced by any choice.

Default shape: beta(s) = c * s / (1+s)^3 with c = 2 * mass.  It is smooth,
positive for s > 0, integrable with closed-form primitive

    B(s) = c * (1/2 - 1/(1+s) + 1/(2 (1+s)^2)).

A strictly nondecreasing beta is incompatible with finite mass, so the
default is deliberately non-monotone (it peaks at s = 1/2); the node solver
does not rely on beta monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import NegativeArgument, NonpositiveEps

MASS_CHECK_TOL = 1e-10


class PenaltyShape(Enum):
    RATIONAL_CUBE = "RATIONAL_CUBE"
    CUSTOM_TABLE = "CUSTOM_TABLE"


@dataclass
class PenaltyFamily:
    """Immutable penalty family; construct via make_penalty()."""

    shape: PenaltyShape
    mass: float
    scale: float
    # CUSTOM_TABLE payload (PPoly breakpoints/coefficients), empty otherwise
    table_breaks: np.ndarray = field(default_factory=lambda: np.empty(0))
    table_coeffs: np.ndarray = field(default_factory=lambda: np.empty((4, 0)))
    table_anti_coeffs: np.ndarray = field(default_factory=lambda: np.empty((5, 0)))

    def _check_nonneg(self, s):
        if np.any(np.asarray(s) < 0):
            raise NegativeArgument("beta arguments must be >= 0")

    def beta(self, s):
        """Penalty value beta(s) for s >= 0."""
        self._check_nonneg(s)
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if self.shape is PenaltyShape.RATIONAL_CUBE:
            out = self.scale * s / (1.0 + s) ** 3
        else:
            out = self._ppoly_eval(self.table_breaks, self.table_coeffs, s)
        return float(out[0]) if scalar else out

    def B(self, s):
        """Primitive B(s) = integral of beta over [0, s]."""
        self._check_nonneg(s)
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if self.shape is PenaltyShape.RATIONAL_CUBE:
            # 1/2 - 1/(1+s) + 1/(2 (1+s)^2) collapses to this stable form
            out = self.scale * 0.5 * (s / (1.0 + s)) ** 2
        else:
            smax = self.table_breaks[-1]
            out = self._ppoly_eval(
                self.table_breaks, self.table_anti_coeffs, np.minimum(s, smax)
            )
            out = np.where(s >= smax, self.mass, out)
        return float(out[0]) if scalar else out

    def beta_eps(self, u, eps: float):
        """Concentrated penalty (1/eps) * beta(u/eps)."""
        if not eps > 0:
            raise NonpositiveEps(f"eps must be > 0, got {eps}")
        if np.ndim(u) == 0:
            return self.beta(float(u) / eps) / eps
        return self.beta(np.asarray(u, dtype=np.float64) / eps) / eps

    def B_eps(self, u, eps: float):
        """Primitive of beta_eps; equals B(u/eps), saturates at mass."""
        if not eps > 0:
            raise NonpositiveEps(f"eps must be > 0, got {eps}")
        if np.ndim(u) == 0:
            return self.B(float(u) / eps)
        return self.B(np.asarray(u, dtype=np.float64) / eps)

    @staticmethod
    def _ppoly_eval(breaks, coeffs, s):
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.zeros_like(s)
        inside = s < breaks[-1]
        idx = np.clip(np.searchsorted(breaks, s[inside], side="right") - 1, 0,
                      len(breaks) - 2)
        t = s[inside] - breaks[idx]
        acc = np.zeros_like(t)
        for m in range(coeffs.shape[0]):
            acc = acc * t + coeffs[m, idx]
        out[inside] = acc
        return out

    def kernel_payload(self):
        """(kind, scale, breaks, coeffs) consumed by the numba kernels."""
        kind = 0 if self.shape is PenaltyShape.RATIONAL_CUBE else 1
        return kind, self.scale, self.table_breaks, self.table_coeffs


def make_penalty(shape: str = "RATIONAL_CUBE", mass: float = 0.5,
                 table=None) -> PenaltyFamily:
    """Construct and validate a penalty family.

    Args:
        shape: "RATIONAL_CUBE" or "CUSTOM_TABLE".
        mass: target integral of beta over [0, inf).
        table: for CUSTOM_TABLE, an (n, 2) array of (s, beta(s)) samples with
            strictly increasing s starting at 0; the tabulated shape is
            rescaled so its integral equals mass, interpolated by a cubic
            spline, and treated as 0 beyond the last s.
    """
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}")
    sh = PenaltyShape(shape)
    if sh is PenaltyShape.RATIONAL_CUBE:
        fam = PenaltyFamily(sh, mass, scale=2.0 * mass)
        _verify_mass(fam)
        return fam

    tab = np.asarray(table, dtype=np.float64)
    if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 4:
        raise ValueError("CUSTOM_TABLE needs an (n>=4, 2) array of (s, beta)")
    s, b = tab[:, 0], tab[:, 1]
    if s[0] != 0.0 or np.any(np.diff(s) <= 0):
        raise ValueError("table s column must start at 0 and increase strictly")
    if b[0] != 0.0:
        raise ValueError("table must have beta(0) = 0")
    if np.any(b[1:] <= 0):
        raise ValueError("table beta values must be positive for s > 0")
    spl = CubicSpline(s, b, bc_type="natural")
    raw_mass = float(spl.antiderivative()(s[-1]))
    if raw_mass <= 0:
        raise ValueError("table integrates to a nonpositive mass")
    factor = mass / raw_mass
    spl = CubicSpline(s, b * factor, bc_type="natural")
    anti = spl.antiderivative()
    fam = PenaltyFamily(
        sh, mass, scale=factor,
        table_breaks=np.ascontiguousarray(spl.x),
        table_coeffs=np.ascontiguousarray(spl.c),
        table_anti_coeffs=np.ascontiguousarray(anti.c),
    )
    probe = fam.beta(np.linspace(0.0, s[-1], 4097)[1:])
    if np.any(probe < 0):
        raise ValueError("spline through the table dips below 0; refine the table")
    _verify_mass(fam, upper=float(s[-1]))
    return fam


def _verify_mass(fam: PenaltyFamily, upper: float | None = None):
    """Numerically confirm integral(beta) == mass to MASS_CHECK_TOL."""
    if upper is None:
        val, err = quad(lambda t: fam.beta(t), 0.0, np.inf, limit=400)
    else:
        val, err = quad(lambda t: fam.beta(t), 0.0, upper, limit=400)
    if abs(val - fam.mass) > MASS_CHECK_TOL:
        raise ValueError(
            f"penalty mass check failed: integral {val!r} vs mass {fam.mass!r}"
        )


def load_table_csv(path) -> np.ndarray:
    """Read a two-column (s, beta) CSV with optional header line."""
    rows = np.genfromtxt(path, delimiter=",", comments="#", skip_header=0,
                         names=None)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if np.isnan(rows[0]).any():
        rows = rows[1:]
    return rows
