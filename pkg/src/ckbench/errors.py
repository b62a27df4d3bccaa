"""Exceptions shared across the workbench."""


class CKError(Exception):
    """Base class for all library errors."""


class BudgetExceeded(CKError):
    def __init__(self, required: int, allowed: int, what: str = "candidates"):
        self.required = required
        self.allowed = allowed
        self.what = what
        super().__init__(f"budget exceeded: {required} {what} needed, {allowed} allowed")


class ParseError(CKError, ValueError):
    """Syntax error in a formula, carrying the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        self.message = message
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class Violation:
    """One violated condition together with a witness."""

    __slots__ = ("kind", "witness")

    def __init__(self, kind: str, witness=()):
        self.kind = kind
        self.witness = tuple(witness)

    def __eq__(self, other):
        return isinstance(other, Violation) and (self.kind, self.witness) == (other.kind, other.witness)

    def __hash__(self):
        return hash((self.kind, self.witness))

    def __repr__(self):
        return f"{self.kind}{self.witness!r}"

    def to_json(self):
        return {"kind": self.kind, "witness": list(self.witness)}


class StructureError(CKError, ValueError):
    """A candidate structure failed validation; ``violations`` lists why."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = ", ".join(repr(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"{type(self).__name__}: {head}{more}")

    @property
    def kinds(self):
        return {v.kind for v in self.violations}


class FrameError(StructureError):
    pass


class AlgebraError(StructureError):
    pass


class MorphismError(StructureError):
    pass


class GeneralFrameError(StructureError):
    pass


class ArgumentNotUpset(CKError, ValueError):
    pass


class CompanionNotFound(CKError):
    pass


class CompanionNotUnique(CKError):
    pass


class NotSahlqvist(CKError, ValueError):
    pass


class UnboundPredicate(CKError, KeyError):
    pass


class InputError(CKError, ValueError):
    """Malformed input document."""
