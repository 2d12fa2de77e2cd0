"""Exception types shared across the package."""


class ConsensusError(Exception):
    """Base class for errors raised by this package."""


class UtilityDomainError(ConsensusError):
    """Utility evaluated outside its domain (requires y - s > 0)."""

    def __init__(self, theta, s, y):
        self.theta = float(theta)
        self.s = float(s)
        self.y = float(y)
        super().__init__(
            f"utility undefined at outcome y={self.y}: needs y - s > 0, "
            f"got y - s = {self.y - self.s} at grid point "
            f"(theta={self.theta}, s={self.s})"
        )


class GridError(ConsensusError):
    """Invalid grid specification (empty axis, nonpositive step, min > max)."""


class ShapeMismatchError(ConsensusError):
    """Per-point arrays do not line up with the grid."""


class EmptySubsetError(ConsensusError):
    """Critical values requested over an empty subset of grid points."""


class MissingQuantileError(ConsensusError):
    """A band variant needs a quantile the critical values do not carry."""


class QuadratureError(ConsensusError):
    """Numerical integration failed to reach the requested tolerance."""


class ConfigError(ConsensusError):
    """Invalid analysis or simulation configuration, or unparseable input."""
