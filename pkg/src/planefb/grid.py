"""Truncated half-space lattice and nodal field storage.

The computational domain is the box [-R, R]^N x [-L, 0] standing in for the
half-ball truncation: homogeneous Dirichlet values on the lateral sides and
the bottom, a distinguished plane trace at y = 0 (the last y-slice).

Coordinate construction guarantees two exact lattice facts:
  * x = 0 is a node (nx odd), stored as exactly 0.0,
  * the plane y = 0 is the slice j = ny - 1, stored as exactly 0.0.
Axes are built as integer multiples of the spacing around those anchors, so
the outer box corners agree with +-R / -L up to one rounding ulp.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvenNodeCount, GridMismatch, OutOfDomain


@dataclass(frozen=True)
class GridSpec:
    """Parameters of the Cartesian box grid.

    Attributes:
        plane_dim: number of plane dimensions N, 1 or 2.
        half_width: R > 0, plane axes span [-R, R].
        depth: L > 0, vertical axis spans [-L, 0].
        nx: node count per plane axis, odd.
        ny: node count along y.
    """

    plane_dim: int
    half_width: float
    depth: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.plane_dim not in (1, 2):
            raise ValueError(f"plane_dim must be 1 or 2, got {self.plane_dim}")
        if self.nx < 3 or self.nx % 2 == 0:
            raise EvenNodeCount(f"nx must be odd and >= 3, got {self.nx}")
        if self.ny < 2:
            raise ValueError(f"ny must be >= 2, got {self.ny}")
        if not (self.half_width > 0):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if not (self.depth > 0):
            raise ValueError(f"depth must be positive, got {self.depth}")

    @property
    def hx(self) -> float:
        return 2.0 * self.half_width / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.depth / (self.ny - 1)

    @property
    def num_nodes(self) -> int:
        return self.nx**self.plane_dim * self.ny


class Grid:
    """Realized lattice: coordinate axes plus index maps.

    Node (i_1, ..., i_N, j) sits at (xs[i_1], ..., xs[i_N], ys[j]).  The
    plane trace is j = ny - 1.  Built by :func:`build_grid`.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        mid = (spec.nx - 1) // 2
        # integer-multiple construction: xs[mid] == 0.0 and ys[-1] == 0.0 exactly
        self.xs = (np.arange(spec.nx) - mid) * spec.hx
        self.ys = (np.arange(spec.ny) - (spec.ny - 1)) * spec.hy
        self.hx = spec.hx
        self.hy = spec.hy
        self.nx = spec.nx
        self.ny = spec.ny
        self.plane_dim = spec.plane_dim

    @property
    def shape(self) -> tuple:
        return (self.nx,) * self.plane_dim + (self.ny,)

    def node_coords(self, index: tuple) -> tuple:
        """Coordinates of a node multi-index (i_1, ..., i_N, j)."""
        *ix, j = index
        return tuple(self.xs[i] for i in ix) + (self.ys[j],)

    def coords_index(self, point) -> tuple:
        """Inverse map; the point must be a lattice node."""
        *x, y = point
        idx = tuple(int(round((xi - self.xs[0]) / self.hx)) for xi in x)
        j = int(round((y - self.ys[0]) / self.hy))
        for i in idx:
            if not 0 <= i < self.nx:
                raise OutOfDomain(f"point {point} not a grid node")
        if not 0 <= j < self.ny:
            raise OutOfDomain(f"point {point} not a grid node")
        if any(self.xs[i] != xi for i, xi in zip(idx, x)) or self.ys[j] != y:
            raise OutOfDomain(f"point {point} not a grid node")
        return idx + (j,)

    def plane_points(self) -> np.ndarray:
        """Plane node coordinates, shape (nx,) for N=1 or (nx, nx, 2) for N=2."""
        if self.plane_dim == 1:
            return self.xs.copy()
        x1, x2 = np.meshgrid(self.xs, self.xs, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def plane_radii(self) -> np.ndarray:
        """|x| at every plane node."""
        if self.plane_dim == 1:
            return np.abs(self.xs)
        pts = self.plane_points()
        return np.sqrt(pts[..., 0] ** 2 + pts[..., 1] ** 2)


def build_grid(spec: GridSpec) -> Grid:
    """Build the lattice for a validated spec."""
    return Grid(spec)


@dataclass
class Field:
    """Nodal scalar values on a grid.

    Storage is a C-ordered array of shape grid.shape; the flat view follows
    the plane-major ordering contract (plane indices vary slowest, the y
    index fastest), so values[..., -1] is the plane trace.
    """

    grid: Grid
    data: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.data is None:
            self.data = np.zeros(self.grid.shape)
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != self.grid.shape:
            raise GridMismatch(
                f"field shape {self.data.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field values must be finite")

    @property
    def values(self) -> np.ndarray:
        """Flat plane-major view of the nodal values."""
        return self.data.ravel()

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy())


def field_from_function(grid: Grid, fn) -> Field:
    """Sample fn(x..., y) on every node; fn must broadcast over arrays."""
    if grid.plane_dim == 1:
        x, y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
        return Field(grid, fn(x, y))
    x1, x2, y = np.meshgrid(grid.xs, grid.xs, grid.ys, indexing="ij")
    return Field(grid, fn(x1, x2, y))


def plane_trace(f: Field, copy: bool = False) -> np.ndarray:
    """Return the j = ny - 1 slice of the field.

    With copy=False (default) the result is a writable view: mutations write
    through to the field.  With copy=True an independent copy is returned.
    """
    tr = f.data[..., -1]
    return tr.copy() if copy else tr


def interpolate(f: Field, p) -> float:
    """Multilinear interpolation at point p = (x..., y).

    Exact on multilinear polynomials.  Raises OutOfDomain outside the box
    (an absolute slack of ~1 ulp of the box size is tolerated).
    """
    g = f.grid
    *x, y = p
    if len(x) != g.plane_dim:
        raise OutOfDomain(f"point {p} has wrong dimension for N={g.plane_dim}")
    slop = 4.0 * np.finfo(float).eps * max(g.spec.half_width, g.spec.depth)
    axes = [g.xs] * g.plane_dim + [g.ys]
    coords = list(x) + [y]
    idx = []
    wts = []
    for c, ax in zip(coords, axes):
        if c < ax[0] - slop or c > ax[-1] + slop:
            raise OutOfDomain(f"point {p} outside domain box")
        h = ax[1] - ax[0]
        i = int(np.floor((c - ax[0]) / h))
        i = min(max(i, 0), len(ax) - 2)
        t = (c - ax[i]) / h
        t = min(max(t, 0.0), 1.0)
        idx.append(i)
        wts.append(t)
    out = 0.0
    for corner in range(2 ** len(idx)):
        w = 1.0
        node = []
        for d in range(len(idx)):
            bit = (corner >> d) & 1
            w *= wts[d] if bit else (1.0 - wts[d])
            node.append(idx[d] + bit)
        out += w * f.data[tuple(node)]
    return float(out)


# ----------------------------------------------------------------------
# Axisymmetric companion grid: (r, y) in [0, R] x [-L, 0].
# Used by the cylindrical-reduction solver; the plane trace is radial.
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AxisymGridSpec:
    """Grid in (r, y) for the axially symmetric reduction.

    plane_dim is the dimension N of the physical plane the radius lives in
    (the cylindrical term is (N-1)/r).
    """

    plane_dim: int
    radius: float
    depth: float
    nr: int
    ny: int

    def __post_init__(self):
        if self.plane_dim not in (1, 2):
            raise ValueError(f"plane_dim must be 1 or 2, got {self.plane_dim}")
        if self.nr < 3 or self.ny < 2:
            raise ValueError("nr must be >= 3 and ny >= 2")
        if not (self.radius > 0 and self.depth > 0):
            raise ValueError("radius and depth must be positive")

    @property
    def hr(self) -> float:
        return self.radius / (self.nr - 1)

    @property
    def hy(self) -> float:
        return self.depth / (self.ny - 1)


class AxisymGrid:
    """Realized (r, y) lattice; r = 0 is the symmetry axis."""

    def __init__(self, spec: AxisymGridSpec):
        self.spec = spec
        self.rs = np.arange(spec.nr) * spec.hr
        self.ys = (np.arange(spec.ny) - (spec.ny - 1)) * spec.hy
        self.hr = spec.hr
        self.hy = spec.hy
        self.nr = spec.nr
        self.ny = spec.ny
        self.plane_dim = spec.plane_dim

    @property
    def shape(self) -> tuple:
        return (self.nr, self.ny)

    def plane_radii(self) -> np.ndarray:
        return self.rs.copy()


def build_axisym_grid(spec: AxisymGridSpec) -> AxisymGrid:
    return AxisymGrid(spec)


@dataclass
class AxisymField:
    """Nodal values u(r, y) on an AxisymGrid, shape (nr, ny)."""

    grid: AxisymGrid
    data: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.data is None:
            self.data = np.zeros(self.grid.shape)
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != self.grid.shape:
            raise GridMismatch(
                f"field shape {self.data.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field values must be finite")

    @property
    def values(self) -> np.ndarray:
        return self.data.ravel()

    def copy(self) -> "AxisymField":
        return AxisymField(self.grid, self.data.copy())
