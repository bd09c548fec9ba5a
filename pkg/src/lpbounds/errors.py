"""Exception hierarchy shared by all modules."""


class LPBoundsError(Exception):
    """Base class for every error raised by this package."""


class ConvergenceFailure(LPBoundsError, ArithmeticError):
    pass


class NotPositiveSemidefinite(LPBoundsError, ValueError):
    pass


class NotHermitian(LPBoundsError, ValueError):
    pass


class DimensionMismatch(LPBoundsError, ValueError):
    pass


class DimensionOverflow(LPBoundsError, ValueError):
    pass


class OutOfRange(LPBoundsError, ValueError):
    pass


class UnknownKernel(LPBoundsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidKernel(LPBoundsError, ValueError):
    pass


class EigenvalueOutOfUnitInterval(LPBoundsError, ValueError):
    pass


class ValidationError(LPBoundsError, ValueError):
    """An operator set or state failed its physical validity checks.

    ``report`` carries the structured deviations when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(LPBoundsError, ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = ""
        if line is not None:
            where = f"line {line}: "
        if field is not None:
            where += f"[{field}] "
        super().__init__(where + message)


class ConfigInvalid(LPBoundsError, ValueError):
    pass
