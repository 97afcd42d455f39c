"""Exception types shared across the package.

The CLI maps ``ConfigError`` to exit code 2 and ``NumericError`` to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid specification, parameters or input file."""


class NumericError(ArithmeticError):
    """A computation left its supported numeric range."""


class BlockTooLargeError(NumericError):
    """Block too long for the exact distribution; use Monte Carlo instead."""
