"""Exception types shared across the package.

The command line front end maps these onto process exit codes, so library
code should raise the most specific type that applies.
"""


class ConfigError(ValueError):
    """A config file or config value is missing, malformed, or inconsistent."""


class CapacityError(RuntimeError):
    """A requested computation exceeds a hard size guard (e.g. exhaustive
    enumeration beyond the supported number of predictors)."""


class NumericalError(RuntimeError):
    """An iterative or adaptive numerical routine failed to reach its
    target accuracy.  Carries whatever diagnostic the caller attached."""

    def __init__(self, message, *, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic
