"""Exception types shared across the package."""


class TableError(ValueError):
    """Base class for malformed function tables and operation misuse."""


class NegativeValue(TableError):
    pass


class LengthMismatch(TableError):
    pass


class ArityTooLarge(TableError):
    pass


class ArityTooSmall(TableError):
    pass


class NotABijection(TableError):
    pass


class IndexOutOfRange(TableError):
    pass


class TableParseError(TableError):
    pass


class NotStrictlyPositive(ValueError):
    pass


class NotNegative(ValueError):
    pass


class InternalInconsistency(RuntimeError):
    """Two computation routes that must agree did not."""


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} at line {line}, column {col}"
        super().__init__(message)


class UndeclaredVariable(FormulaError):
    pass


class UnknownFunction(FormulaError):
    pass


class ArityMismatch(FormulaError):
    pass
