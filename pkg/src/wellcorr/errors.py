"""Exception hierarchy shared by every module.

Each concrete class carries an ``exit_code`` used by the command-line front
end, so a failure maps to a distinct process status. Codes 1 (unexpected
failure) and 2 (usage error, from argparse) are reserved.
"""


class WellcorrError(Exception):
    exit_code = 1


class ParameterDomainError(WellcorrError, ValueError):
    """A state or series parameter lies outside its admissible range."""

    exit_code = 4


class UnknownStateError(WellcorrError, ValueError):
    exit_code = 3


class StateFileError(WellcorrError, ValueError):
    """A JSON state document could not be parsed or violates the schema."""

    exit_code = 5


class UnreachableToleranceError(WellcorrError, ValueError):
    """No finite truncation can certify the requested tolerance."""

    exit_code = 6


class ConvergenceError(WellcorrError, ValueError):
    exit_code = 7


class InsufficientDataError(WellcorrError, ValueError):
    exit_code = 8


class PoleError(WellcorrError, ValueError):
    """A special function was evaluated exactly at one of its poles."""

    exit_code = 9

    def __init__(self, message, location):
        super().__init__(message)
        self.location = location


class PoleOnLineError(WellcorrError, ValueError):
    """The shifted Mellin contour passes through a pole; pick another depth."""

    exit_code = 10


class ScaleError(WellcorrError, ValueError):
    exit_code = 11


class ChannelError(WellcorrError, ValueError):
    exit_code = 12
