"""Exception hierarchy for spadcal.

All library errors derive from :class:`SpadCalError` so callers (notably the
CLI) can map them to exit codes in one place.
"""


class SpadCalError(Exception):
    """Base class for all spadcal errors."""


class InvalidInputError(SpadCalError, ValueError):
    """An argument violates a documented precondition."""


class ConfigurationError(SpadCalError):
    """A configuration object is internally inconsistent."""


class SaturationError(SpadCalError):
    """Observed click rate lies outside the invertible range of a model."""


class SignalBelowBackgroundError(SpadCalError):
    """Observed click rate does not exceed the dark-count rate."""


class NumericFailureError(SpadCalError):
    """A numeric routine failed to converge; indicates a bug, not bad data."""


class EmptyStreamError(SpadCalError):
    """An operation received a tag stream with no events."""


class DegenerateResultError(SpadCalError):
    """Not enough events to produce a meaningful result."""


class ParseError(SpadCalError):
    """A tag file is malformed; message carries the line or byte position."""


class OrderingError(ParseError):
    """Timestamps in a tag file are not monotonically nondecreasing."""
