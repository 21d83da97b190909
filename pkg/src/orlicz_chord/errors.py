"""Exception hierarchy shared by every module of the package."""


class ChordError(Exception):
    """Base class for all errors raised by orlicz_chord."""


class InvalidParameter(ChordError, ValueError):
    pass


class DimensionMismatch(ChordError, ValueError):
    pass


class NonPositiveRadial(ChordError, ValueError):
    """A body representation produced a radial value at or below the floor."""


class SingularMatrix(ChordError, ValueError):
    pass


class NonPositiveArgument(ChordError, ValueError):
    pass


class ConvergenceFailure(ChordError, RuntimeError):
    pass


class IndexOutOfRange(ChordError, ValueError):
    pass


class ArityMismatch(ChordError, ValueError):
    pass


class ZeroCoefficients(ChordError, ValueError):
    pass


class TabulatedLookupError(ChordError, ValueError):
    """A tabulated body was queried at a direction that is not one of its nodes."""


class ConfigError(ChordError):
    """Scene configuration could not be parsed or validated.

    ``field`` is a dotted path into the document and ``line`` the 1-based
    source line when it could be recovered.
    """

    def __init__(self, message, field=None, line=None):
        self.message = message
        self.field = field
        self.line = line
        super().__init__(str(self))

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(self.field)
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


class DigestParseError(ChordError, ValueError):
    pass
