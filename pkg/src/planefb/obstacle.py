"""Plane obstacle: unit plateau with a strictly concave skirt.

The default profile is radial:

    phi(r) = 1                         for r <= 1,
    phi(r) = 1 - ((r - 1) / rho0)^2    for 1 < r < 1 + rho0,
    phi(r) = 0                         beyond,

so the plateau value is 1 on the unit ball, the positive support is the
closed ball of radius 1 + rho0, the glue at r = 1 is C^1, and the skirt is
strictly concave along rays.  A tabulated radial profile can replace the
skirt as long as it preserves those three facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import PchipInterpolator


class ObstacleProfile(Enum):
    PARABOLIC_SKIRT = "PARABOLIC_SKIRT"
    CUSTOM_RADIAL = "CUSTOM_RADIAL"


@dataclass
class ObstacleSpec:
    """Radial obstacle description.

    Attributes:
        rho0: skirt width > 0; positive support radius is 1 + rho0.
        profile: PARABOLIC_SKIRT (default) or CUSTOM_RADIAL.
        center: plane point the profile is centered at (default origin).
    """

    rho0: float = 0.25
    profile: ObstacleProfile = ObstacleProfile.PARABOLIC_SKIRT
    center: tuple = (0.0,)
    _interp: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if isinstance(self.profile, str):
            self.profile = ObstacleProfile(self.profile)
        self.center = tuple(float(c) for c in self.center)

    @property
    def support_radius(self) -> float:
        """Radius of the closed support of phi^+."""
        return 1.0 + self.rho0

    def _radius(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != len(self.center):
            if len(self.center) == 1:
                return np.abs(x - self.center[0])
            raise ValueError("point dimension does not match obstacle center")
        c = np.asarray(self.center)
        return np.sqrt(np.sum((x - c) ** 2, axis=-1))

    def phi_radial(self, r):
        """Profile value as a function of radius."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=np.float64))
        if self.profile is ObstacleProfile.PARABOLIC_SKIRT:
            out = np.where(
                r <= 1.0, 1.0,
                np.maximum(0.0, 1.0 - ((r - 1.0) / self.rho0) ** 2),
            )
        else:
            out = np.zeros_like(r)
            inside = r <= self._interp.x[-1]
            out[inside] = np.clip(self._interp(r[inside]), 0.0, 1.0)
            out[r <= 1.0] = 1.0
        return float(out[0]) if scalar else out

    def phi(self, x):
        """Obstacle value at a plane point (or array of points)."""
        return self.phi_radial(self._radius(x))

    def in_coincidence_candidate(self, x) -> bool:
        """True where |x - center| <= 1 + rho0 (phi can be positive)."""
        r = self._radius(x)
        out = r <= self.support_radius
        return bool(out) if np.ndim(out) == 0 else out


def make_obstacle(rho0: float = 0.25, profile: str = "PARABOLIC_SKIRT",
                  center=(0.0,), radial_table=None) -> ObstacleSpec:
    """Construct and validate an obstacle.

    For CUSTOM_RADIAL, radial_table is an (n, 2) array of (r, phi) samples;
    validation enforces the plateau (phi = 1 for r <= 1), the support bound
    (phi = 0 for r >= 1 + rho0), monotone decay, and strict concavity of
    the second radial differences inside the skirt.
    """
    spec = ObstacleSpec(rho0=rho0, profile=profile, center=center)
    if spec.profile is ObstacleProfile.PARABOLIC_SKIRT:
        return spec

    tab = np.asarray(radial_table, dtype=np.float64)
    if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 5:
        raise ValueError("CUSTOM_RADIAL needs an (n>=5, 2) array of (r, phi)")
    r, v = tab[:, 0], tab[:, 1]
    if np.any(np.diff(r) <= 0):
        raise ValueError("radial table r column must increase strictly")
    if not np.all(np.abs(v[r <= 1.0] - 1.0) <= 1e-12):
        raise ValueError("radial table must have phi = 1 on r <= 1")
    if np.any(v[r >= spec.support_radius] != 0.0):
        raise ValueError("radial table support exceeds 1 + rho0")
    if np.any(np.diff(v) > 1e-12):
        raise ValueError("radial table must be nonincreasing")
    skirt = (r > 1.0) & (r < spec.support_radius)
    if skirt.sum() >= 3:
        d2 = np.diff(v[skirt], 2)
        if np.any(d2 >= 0):
            raise ValueError("radial table skirt must be strictly concave")
    interp = PchipInterpolator(r, v, extrapolate=False)
    spec._interp = interp
    return spec


def sample_plane(spec: ObstacleSpec, grid) -> np.ndarray:
    """Obstacle values at every plane node of a Grid or AxisymGrid."""
    if any(c != 0.0 for c in spec.center):
        if not hasattr(grid, "plane_points"):
            raise ValueError("off-center obstacles need a Cartesian grid")
        return spec.phi(grid.plane_points())
    return spec.phi_radial(grid.plane_radii())


def load_radial_csv(path) -> np.ndarray:
    rows = np.genfromtxt(path, delimiter=",", comments="#")
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if np.isnan(rows[0]).any():
        rows = rows[1:]
    return rows
