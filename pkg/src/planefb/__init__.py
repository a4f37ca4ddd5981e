"""planefb: numerical laboratory for a one-phase free boundary coupled to a
diffusive plane.

Constructs penalized approximations of the coupled system, drives the
penalty scale to the grid floor by warm-started continuation, extracts the
free surface and its plane contact set, and checks the regularity and
nondegeneracy statements quantitatively.
"""

__version__ = "0.1.0"

from .grid import (AxisymField, AxisymGrid, AxisymGridSpec, Field, Grid,
                   GridSpec, build_axisym_grid, build_grid,
                   field_from_function, interpolate, plane_trace)
from .obstacle import ObstacleSpec, make_obstacle, sample_plane
from .penalty import PenaltyFamily, make_penalty
from .solver import (SolveParams, SolveResult, continuation_solve,
                     parabolic_solve, psor_solve, slab_test_solve)
from .oracle import OracleProfile, brute_obstacle_1d, ode1d_penalized, slab_exact
from .fb_extract import (FreeBoundary, extract_free_boundary, extract_omega,
                         extract_psi, uy_trace)
from .verify import VerificationReport, VerifyParams, verify_solution
from .reduced_obstacle import (ReducedProblem, build_reduced_from_solution,
                               compare_boundaries, solve_reduced)

__all__ = [
    "AxisymField", "AxisymGrid", "AxisymGridSpec", "Field", "Grid",
    "GridSpec", "build_axisym_grid", "build_grid", "field_from_function",
    "interpolate", "plane_trace", "ObstacleSpec", "make_obstacle",
    "sample_plane", "PenaltyFamily", "make_penalty", "SolveParams",
    "SolveResult", "continuation_solve", "parabolic_solve", "psor_solve",
    "slab_test_solve", "OracleProfile", "brute_obstacle_1d",
    "ode1d_penalized", "slab_exact", "FreeBoundary",
    "extract_free_boundary", "extract_omega", "extract_psi", "uy_trace",
    "VerificationReport", "VerifyParams", "verify_solution",
    "ReducedProblem", "build_reduced_from_solution", "compare_boundaries",
    "solve_reduced",
]
