"""Exception hierarchy shared by every workbench module."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class VocabularyError(WorkbenchError):
    pass


class StructureError(WorkbenchError):
    pass


class MissingConstant(StructureError):
    pass


class NotASubset(StructureError):
    pass


class VocabularyMismatch(StructureError):
    pass


class SizeLimitExceeded(WorkbenchError):
    pass


class FormulaError(WorkbenchError):
    pass


class FormulaSyntaxError(FormulaError):
    """Raised by the parser; ``position`` is a 0-based character offset."""

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class ArityError(FormulaError):
    pass


class UnknownSymbol(FormulaError):
    pass


class UnboundVariable(FormulaError):
    pass


class NotASentence(FormulaError):
    pass


class PreconditionFailed(WorkbenchError):
    pass


class EmptyCollection(WorkbenchError):
    pass


class NotAnExtension(WorkbenchError):
    pass


class WrongArity(WorkbenchError):
    pass


class BudgetExceeded(WorkbenchError):
    pass


class MissingCertificate(WorkbenchError):
    pass
