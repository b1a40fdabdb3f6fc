"""Exception types shared across the package."""


class FluidPendError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(FluidPendError, ValueError):
    """A physical or discretization parameter violates its precondition."""


class MeshFormatError(FluidPendError, ValueError):
    """A mesh file could not be parsed."""


class OrientationError(FluidPendError, ValueError):
    """A triangle is listed clockwise (non-positive signed area)."""


class NonManifoldError(FluidPendError, ValueError):
    """An edge is shared by more than two triangles."""


class ConfigError(FluidPendError, ValueError):
    """A run configuration is invalid or contains unknown keys."""


class SolverError(FluidPendError, RuntimeError):
    """A linear solve failed or produced an invalid state."""
