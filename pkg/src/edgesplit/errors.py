"""Shared exception types."""


class DataFormatError(ValueError):
    """A data file (points CSV, trace CSV, model or plan document) is
    missing, malformed, or empty."""


class UsageError(ValueError):
    """Bad or contradictory command-line options."""
