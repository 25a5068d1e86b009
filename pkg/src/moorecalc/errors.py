"""Exception hierarchy shared by every layer of the library."""


class MooreError(Exception):
    """Base class for all library errors."""


class RingError(MooreError):
    """Invalid ring construction or arithmetic across different rings."""


class ContextMismatch(MooreError):
    """Operands live over different grading contexts or rings."""


class SeriesError(MooreError):
    """A series violates a precondition (constant term, parity, unit)."""


class NotInvertible(SeriesError):
    """A required unit is missing."""


class StructureError(MooreError):
    """A derivation, endomorphism or structure is malformed."""


class HypothesisError(MooreError):
    """A standing hypothesis (unit 2, zero divisors, torsion) fails."""


class ParseError(MooreError):
    """Malformed expression; carries the offending position."""

    def __init__(self, message, text="", pos=0, expected=None):
        self.text = text
        self.pos = pos
        self.expected = expected
        detail = f"{message} at position {pos}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
