"""Semantic exception hierarchy.

Public functions raise these instead of bare ValueError so callers (and the
CLI exit-code mapping) can distinguish bad *inputs* from bad *systems*.
"""


class CountableFifError(Exception):
    """Base error for this package."""


class InvalidInputError(CountableFifError, ValueError):
    """An argument violates a function contract (NaN, empty set, t < 0, ...)."""


class DomainError(CountableFifError, ValueError):
    """A coordinate lies outside the interval it must belong to."""


class ValidationError(CountableFifError):
    """A data system or map family fails its structural validation."""


class RangeViolationError(CountableFifError):
    """A vertical map produced a value outside the working y-interval.

    This signals a misconfigured family; the fix is to enlarge the
    y-interval, not to clamp the value.
    """


class ConfigError(CountableFifError):
    """A run configuration file is malformed or incomplete."""
