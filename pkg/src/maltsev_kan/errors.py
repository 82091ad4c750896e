"""Exception hierarchy.  Every error raised by the package derives from
:class:`MaltsevKanError` so the CLI can map it to an exit code."""


class MaltsevKanError(Exception):
    pass


# term evaluation
class TermError(MaltsevKanError):
    pass


class UnknownOperation(TermError):
    pass


class ArityMismatch(TermError):
    pass


class VarOutOfRange(TermError):
    pass


class ParseError(MaltsevKanError, ValueError):
    """Malformed s-expression or document.  ``pos`` is a character offset
    when one is known."""

    def __init__(self, msg, pos=None):
        if pos is not None:
            msg = f"{msg} (at offset {pos})"
        super().__init__(msg)
        self.pos = pos


# structural validation
class ValidationError(MaltsevKanError):
    pass


class SignatureMismatch(ValidationError):
    pass


class TableShapeError(ValidationError):
    pass


class MaltsevAxiomError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


# horn filling
class HornError(MaltsevKanError):
    pass


class DimensionOutOfRange(HornError):
    pass


class MatchingViolation(HornError):
    pass


class NoPreimage(HornError):
    pass


class MissingMaltsevTerm(HornError):
    pass


class InvariantViolation(HornError):
    """A traced lift step broke one of the recursion invariants."""


# resource limits
class ResourceLimit(MaltsevKanError):
    pass


class BudgetExceeded(ResourceLimit):
    pass
