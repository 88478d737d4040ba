# file: errors.py

"""
Exception hierarchy shared by the simulator, the analyses and the command-line front end.
"""


class ClockSyncError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(ClockSyncError, ValueError):
    """Malformed digraphs, mismatched node counts or out-of-range parameters."""


class UnsupportedScheduleError(InvalidInputError):
    """An exact analysis was asked about a schedule it cannot decide (a Generator)."""


class ScheduleParseError(InvalidInputError):
    """Syntax error in a schedule, init or scenario file."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ConfigError(InvalidInputError):
    """Experiment configuration failed schema validation."""


class ScheduleError(ClockSyncError):
    """A schedule generator failed to produce the digraph of some round."""

    def __init__(self, message, round_number=None):
        if round_number is not None:
            message = f"round {round_number}: {message}"
        super().__init__(message)
        self.round_number = round_number


class PreconditionError(ClockSyncError):
    """The hypothesis of an analysis does not hold for the given input."""


class HorizonTooShortError(ClockSyncError):
    """A measured quantity has not settled within the recorded horizon."""
