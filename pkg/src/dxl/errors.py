"""Exception hierarchy shared by all solvers.

Each class carries the process exit status the command-line front end uses
when the error escapes a run.
"""


class DXLError(Exception):
    exit_code = 1


class InputError(DXLError, ValueError):
    """Bad argument value (non-finite parameter, empty list, ...)."""

    exit_code = 2


class ConfigError(InputError):
    """Invalid run configuration; ``field`` names the offending key."""

    exit_code = 2

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateGeometryError(InputError):
    def __init__(self, i, j, distance):
        super().__init__(f"spins {i} and {j} are separated by {distance:.3g} (degenerate pair)")
        self.pair = (i, j)
        self.distance = distance


class NumericalError(DXLError, ArithmeticError):
    exit_code = 3


class AccuracyError(NumericalError):
    """An integrator or propagator could not meet its error tolerance."""


class ConvergenceError(NumericalError):
    """A self-consistency loop hit its iteration limit.

    ``distances`` holds the per-iteration maximal L2 distance.
    """

    def __init__(self, message, distances=()):
        super().__init__(message)
        self.distances = list(distances)


class InsufficientDataError(NumericalError):
    pass


class ResourceError(DXLError, MemoryError):
    exit_code = 4
