"""Exception types shared across the package."""


class NlpscopeError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(NlpscopeError, ValueError):
    """An argument violates a documented precondition (wrong shape, bad value)."""


class NotFoundError(NlpscopeError, KeyError):
    """A named entity (problem, group, constraint, plane) does not exist."""

    def __str__(self) -> str:  # KeyError quotes its message; keep it readable
        return self.args[0] if self.args else ""


class ContractError(NlpscopeError):
    """An internal ordering/consistency contract was violated (e.g. event seq gap)."""


class TraceParseError(NlpscopeError):
    """A trace file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnsupportedVersionError(NlpscopeError):
    """File or wire format version is not supported."""


class LineSearchError(NlpscopeError):
    """Backtracking underflowed without satisfying sufficient decrease.

    ``best_x`` / ``best_value`` hold the lowest-loss point probed, for diagnostics.
    """

    def __init__(self, message: str, best_x=None, best_value=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_value = best_value


class DivergedError(NlpscopeError):
    """Solve encountered non-finite values; carries the partial trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class DegeneratePlaneError(NlpscopeError):
    """Requested plane is not well defined (coincident or collinear anchor points)."""


class DegenerateTrajectoryError(NlpscopeError):
    """Trajectory has zero total length; progression is undefined."""


class UnsupportedProjectionError(NlpscopeError):
    """Configurations do not share a common dimension; joint projection refused."""
