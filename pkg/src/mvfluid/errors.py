"""Exceptions raised by the simulator."""


class SimulationError(RuntimeError):
    """Base class for failures while advancing a simulation."""


class NonPositiveJacobian(SimulationError):
    """A discrete Jacobian is zero or negative (mesh inversion).

    Attributes
    ----------
    cell : tuple of int or None
        Lattice index of the offending cell.
    corner : int or None
        Zero-based corner number within that cell.
    value : float or None
        The offending Jacobian.
    """

    def __init__(self, message, cell=None, corner=None, value=None):
        super().__init__(message)
        self.cell = cell
        self.corner = corner
        self.value = value


class NoConvergence(SimulationError):
    """The implicit solver exhausted its iterations."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NonFiniteState(SimulationError):
    """Positions or velocities became NaN or infinite."""


class ConfigError(ValueError):
    """Invalid or unparsable scenario configuration."""
