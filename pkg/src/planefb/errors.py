"""Exception types shared across the package."""


class PlaneFBError(Exception):
    """Base class for all package-specific errors."""


class EvenNodeCount(PlaneFBError):
    """Grid node count along a plane axis must be odd so x = 0 is a node."""


class OutOfDomain(PlaneFBError):
    """Requested point lies outside the grid box."""


class NegativeArgument(PlaneFBError):
    """Penalty functions are defined for nonnegative arguments only."""


class NonpositiveEps(PlaneFBError):
    """Penalty scale eps must be strictly positive."""


class GridTooShallow(PlaneFBError):
    """The one-sided normal stencil at the plane needs ny >= 3."""


class InvalidSchedule(PlaneFBError):
    """Continuation schedule violates the eps >= 2*hy resolvability guard."""


class MaxItersExceeded(PlaneFBError):
    """Iteration budget exhausted before reaching tolerance."""


class NodeNewtonDiverged(PlaneFBError):
    """Scalar node solve failed even after the bisection fallback."""


class NotConverged(PlaneFBError):
    """Operation requires a converged SolveResult."""


class EmptyOmega(PlaneFBError):
    """Plane positivity mask is empty."""


class EmptyBoundary(PlaneFBError):
    """A boundary point set required for comparison is empty."""


class EmptyBand(PlaneFBError):
    """A distance band contains no plane nodes."""


class InsufficientSamples(PlaneFBError):
    """Too few samples inside the fitting window."""


class QuadratureFailure(PlaneFBError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NoFeasibleActiveSet(PlaneFBError):
    """Active-set enumeration found no complementarity-feasible candidate."""


class GridMismatch(PlaneFBError):
    """Operands live on different grids."""


class ConfigError(PlaneFBError):
    """Run configuration is invalid; message names the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")
