"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """A scenario, table, or parameter set is invalid or incomplete."""


class CalibrationError(ConfigError):
    """The requested calibration anchors cannot be satisfied."""
