"""Exception hierarchy shared by every module of the package."""


class CGError(Exception):
    """Base class for all errors raised by conjgrad."""


class DimensionError(CGError, ValueError):
    pass


class InvalidArgument(CGError, ValueError):
    pass


class NonFiniteError(CGError, ArithmeticError):
    pass


class SingularMatrix(CGError, ArithmeticError):
    pass


class BreakdownError(CGError, ArithmeticError):
    """Raised when d^T A d is not safely positive (non-SPD operator or collapse)."""


class InvalidState(CGError, RuntimeError):
    pass


class UnsupportedFormat(CGError, ValueError):
    pass


class ParseError(CGError, ValueError):
    """Malformed input file. ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class IoError(CGError, OSError):
    pass
