"""Exception types raised by the solvers and tooling."""


class SonclustError(Exception):
    """Base class for all package errors."""


class ParameterError(SonclustError, ValueError):
    """An argument is outside its allowed range."""


class ShapeError(SonclustError, ValueError):
    """Array dimensions are inconsistent with the graph or problem."""


class FeasibilityError(SonclustError, ValueError):
    """A dual variable lies outside the dual feasible set."""


class NumericalFailure(SonclustError, ArithmeticError):
    """Non-finite values or an impossible curvature were encountered.

    ``state`` holds the last finite iterate when one is available.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class LineSearchError(NumericalFailure):
    """Backtracking failed to find an Armijo step."""


class DataFormatError(SonclustError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
