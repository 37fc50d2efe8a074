"""Exception hierarchy shared across the package."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SimulationError):
    """Operator/vector dimensions are inconsistent or exceed the configured maximum."""


class IntegrationError(SimulationError):
    """The ODE integrator failed (step-size underflow, tolerance breach, norm drift)."""

    def __init__(self, message, time=None):
        if time is not None:
            message = f"{message} (at t={time:.6g})"
        super().__init__(message)
        self.time = time


class LinearSolveError(SimulationError):
    """A sparse linear solve did not reach the required residual."""


class SingularOperatorError(LinearSolveError):
    """The matrix is singular to working precision."""


class DegenerateBasisError(SimulationError):
    """The driven two-level system is unsplit (zero generalized Rabi frequency)."""


class SingularConfigurationError(SimulationError):
    """The requested resonance condition has no solution for these parameters."""


class PoleError(SimulationError):
    """The effective-coupling denominator vanishes for these parameters."""


class TruncationError(SimulationError):
    """Fock-space truncation is too small for the requested computation."""


class UndefinedCorrelationError(SimulationError):
    """A normalized correlation function has a vanishing denominator."""


class DegenerateSteadyStateError(SimulationError):
    """The Liouvillian kernel holds more than one stationary state."""


class JumpRefinementError(SimulationError):
    """Bisection on a quantum-jump norm threshold did not converge."""


class ConfigError(SimulationError):
    """A run configuration file is malformed or violates the schema."""
