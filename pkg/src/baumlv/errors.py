"""Exception hierarchy shared by every baumlv module."""


class BaumlError(Exception):
    """Base class for all toolkit errors."""


class DslSyntaxError(BaumlError):
    """Bad token or production in a `.bauml`, OCL, property, or machine source."""

    def __init__(self, message, line=None, column=None, source="<input>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.location() + message)

    def location(self):
        if self.line is None:
            return ""
        if self.column is None:
            return f"{self.source}:{self.line}: "
        return f"{self.source}:{self.line}:{self.column}: "


class ValidationError(BaumlError):
    """A parsed model breaks one of the model invariants.

    `code` names the violated invariant; see `baumlv.model.validate.CODES`.
    """

    def __init__(self, code, message, line=None):
        self.code = code
        self.message = message
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}[{code}] {message}")


class UnknownClass(BaumlError):
    pass


class UnknownName(BaumlError):
    pass


class UnboundVariable(BaumlError):
    pass


class PreSnapshotMissing(BaumlError):
    pass


class OclEvaluationError(BaumlError):
    pass


class UnsupportedPostcondition(BaumlError):
    def __init__(self, message, offending=None):
        self.offending = offending
        super().__init__(message)


class PreconditionViolated(BaumlError):
    pass


class NonMonotoneFixpoint(BaumlError):
    pass


class GuardMismatch(BaumlError):
    pass


class MissingTerminalState(BaumlError):
    pass


class NoClassQuantifier(BaumlError):
    pass


class OpenFormula(BaumlError):
    pass


class BudgetExceeded(BaumlError):
    """Grounding ran out of fresh values, objects, or states."""

    def __init__(self, message, resource="values"):
        self.resource = resource
        super().__init__(message)


class InconsistentRetyping(BaumlError):
    pass


class BadInput(BaumlError):
    pass
