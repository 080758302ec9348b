"""Exception types raised across the package."""


class OptomechError(Exception):
    """Base class for all package errors."""


class UnstableDrift(OptomechError):
    """The drift matrix has an eigenvalue with non-negative real part."""


class SingularSystem(OptomechError):
    """A linear system is numerically rank-deficient."""


class StepFailure(OptomechError):
    """Time evolution could not reach the requested accuracy."""


class ConvergenceFailure(OptomechError):
    """The dense eigen-solver did not converge."""


class SingularCovariance(OptomechError):
    """A covariance block has non-positive determinant or cannot be inverted."""


class UnphysicalState(OptomechError):
    """A covariance matrix violates the uncertainty relation."""


class IndexOutOfRange(OptomechError, IndexError):
    """A mode index is outside the state or repeated."""


class DomainError(OptomechError):
    """A closed-form expression was evaluated outside its real domain."""


class ConfigError(OptomechError, ValueError):
    """Invalid parameter values or configuration file contents."""
