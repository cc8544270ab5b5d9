"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class ArousalKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ArousalKitError):
    """Invalid configuration file or parameter value."""


class DataError(ArousalKitError):
    """Malformed or inconsistent input data."""


class NumericError(ArousalKitError):
    """Numerical failure (divergence, NaN loss, unstable filter)."""
