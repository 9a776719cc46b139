# Error types
#> Every failure the library can report carries the exit code the command
#> line should end with, the same way an HTTP exception carries its status.
#>   0  pass
#>   2  verification / build / certification failure
#>   3  invalid input

from typing import Any

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_INVALID = 3


class TunivError(Exception):
    exit_code: int = EXIT_FAILED

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(TunivError):
    """Malformed input or a violated precondition."""

    exit_code = EXIT_INVALID


class DomainError(UsageError):
    """Parameter outside the interval a curve or family is defined on."""


class PreconditionError(UsageError):
    pass


class CertificationError(TunivError):
    """A sampled certification search was exhausted."""


class PlacementError(TunivError):
    """No admissible window exists for a task within the search limits."""


class BuildAborted(TunivError):
    """The degree budget ran out; the partial series is kept on the error."""

    def __init__(self, detail: str, partial: Any = None, report: Any = None):
        super().__init__(detail)
        self.partial = partial
        self.report = report
