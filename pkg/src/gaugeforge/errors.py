"""Exception hierarchy shared across the package.

The CLI maps each category onto a distinct exit code.
"""


class GaugeForgeError(Exception):
    exit_code = 1


class DomainError(GaugeForgeError, ValueError):
    """Invalid quantum-number input (e.g. |m| > j, broken betweenness)."""

    exit_code = 4


class ConfigError(GaugeForgeError, ValueError):
    exit_code = 2


class CapacityError(GaugeForgeError):
    """A requested object would exceed a configured size cap."""

    exit_code = 3


class NumericError(GaugeForgeError):
    """Non-convergence, infeasible angle solve, undersampled series, ..."""

    exit_code = 4
