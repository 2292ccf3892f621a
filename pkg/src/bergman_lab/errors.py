"""Error types shared across the package.

Every failure mode promised by the public contracts gets its own class so
callers (and the CLI exit-code logic) can tell configuration mistakes from
numerical trouble.
"""


class BergmanLabError(Exception):
    """Base class for all package errors."""


class CapacityError(BergmanLabError):
    """Grid resolution cannot integrate the requested degree exactly."""


class DegenerateMetricError(BergmanLabError):
    """A Kahler potential produced a non-positive metric density."""


class BasisMismatchError(BergmanLabError):
    """A basis-tagged matrix was used in the wrong frame."""


class NonPositiveFormError(BergmanLabError):
    """A matrix that must be positive definite failed factorization."""


class KTooSmallError(BergmanLabError):
    """Induced metric not positive at this tensor power."""


class InjectivityViolationError(BergmanLabError):
    """A sample produced a vanishing comparison function for a non-zero
    matrix difference.  Must never happen; aborts the experiment."""


class ConfigError(BergmanLabError):
    """Malformed configuration input (bad key, bad value, bad file)."""
