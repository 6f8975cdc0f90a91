"""
Exception hierarchy for the back-and-forth engine
"""

from typing import Dict, Optional


class BackForthError(Exception):
    """Base class for every error the engine raises on bad input"""

    def to_dict(self) -> Dict:
        return {"type": type(self).__name__, "message": str(self)}


class _PositionedError(BackForthError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.bare_message = message

    def to_dict(self) -> Dict:
        out = super().to_dict()
        out.update({"line": self.line, "column": self.column})
        return out


class WorkspaceSyntaxError(_PositionedError):
    pass


class WorkspaceSemanticError(_PositionedError):
    pass


class SignatureMismatchError(BackForthError):
    pass


class UnsupportedModeError(BackForthError):
    pass


class CapExceededError(BackForthError):
    pass


class PreconditionError(BackForthError):
    pass


class NotDenseError(PreconditionError):
    pass


class NotMonoError(PreconditionError):
    pass


class MalformedInstanceError(BackForthError):
    pass


class TheoremViolation(BackForthError):
    """A theorem certified by the engine failed on concrete data (engine bug)"""
