"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """Argument outside the support of a law or operator (e.g. r >= ct)."""


class PoleError(ValueError):
    """Gamma function evaluated at a non-positive integer."""


class SeriesError(ArithmeticError):
    """A series did not meet its truncation tolerance within max_terms."""


class ConfigError(ValueError):
    """Invalid combination of model parameters."""
