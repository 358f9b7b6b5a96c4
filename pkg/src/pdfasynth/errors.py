"""Exception hierarchy shared by every module of the package."""


class PdfaSynthError(Exception):
    """Base class for all package errors."""


class UnknownProposition(PdfaSynthError):
    def __init__(self, name, line=None, column=None):
        self.name = name
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"unknown proposition {name!r}{where}")


class MalformedSymbol(PdfaSynthError):
    def __init__(self, text, line=None, column=None):
        self.text = text
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"malformed symbol {text!r}{where}")


class EmptyDemoSet(PdfaSynthError):
    pass


class FormulaSyntaxError(PdfaSynthError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class NegationOnCompound(FormulaSyntaxError):
    def __init__(self, position):
        super().__init__("negation is only allowed directly on atoms", position)


class StateBlowup(PdfaSynthError):
    pass


class MaxLengthExceeded(PdfaSynthError):
    pass


class NonGenerativeState(PdfaSynthError):
    pass


class EmptyIntersection(PdfaSynthError):
    pass


class UnsafeDemonstration(PdfaSynthError):
    def __init__(self, trace, position):
        self.trace = trace
        self.position = position
        super().__init__(f"demonstration violates the safety property at symbol {position}")


class SafetyStateMismatch(PdfaSynthError):
    pass


class DimensionMismatch(PdfaSynthError):
    pass


class PathNotTerminal(PdfaSynthError):
    pass


class SpecError(PdfaSynthError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class IterationBoundExceeded(PdfaSynthError):
    pass


class MonotonicityViolation(PdfaSynthError):
    pass


class PointNotAchievable(PdfaSynthError):
    pass


class InternalInconsistency(PdfaSynthError):
    pass


class NoWinningStrategy(PdfaSynthError):
    pass


class FormatError(PdfaSynthError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
