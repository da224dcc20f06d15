"""Shared exception types."""


class ParseError(ValueError):
    """An input file could not be parsed into the expected structure."""


class ValidationError(ValueError):
    """A value violates a documented invariant; the message names the field."""


class InfeasibleError(ValueError):
    """A mission parameter makes the requested computation meaningless,
    e.g. a latency budget already consumed by the data transfer."""
