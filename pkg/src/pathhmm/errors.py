"""Exception types shared across the package.

The CLI maps these onto its exit codes: configuration and parse problems
exit with 2, numerical failures with 3, dimension mismatches with 4.
"""


class PathHmmError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(PathHmmError):
    """Invalid or unknown configuration key/value."""


class DataFormatError(PathHmmError):
    """Malformed input file (CSV, model JSON)."""


class NumericalError(PathHmmError):
    """Numerical failure: zero likelihood, failed Cholesky, singular solve."""


class DimensionMismatch(PathHmmError):
    """Observation shape, grid, or family incompatible with the model."""


class DegenerateStateWarning(UserWarning):
    """A state received (almost) no posterior mass during reestimation."""
