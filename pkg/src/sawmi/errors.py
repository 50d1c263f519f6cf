"""Exceptions raised by the solver."""


class WmiError(Exception):
    """Base class of all solver errors."""


class MalformedAssignment(WmiError, ValueError):
    """An atom was assigned both truth values."""


class ParseError(WmiError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnknownVariable(ParseError):
    pass


class Unbounded(WmiError):
    """A real variable or polytope is not bounded, so the integral diverges."""


class Unsat(WmiError):
    """A literal set expected to be LRA-consistent is not."""


class NegativeWeight(WmiError, ValueError):
    pass


class UnknownFunc(WmiError, KeyError):
    pass


class NotPolynomial(WmiError, TypeError):
    pass


class ZeroAcceptance(WmiError):
    """No Monte-Carlo sample fell inside the polytope."""


class SkeletonFiViolation(WmiError, AssertionError):
    """A weight restricted by an enumerated assignment still has a condition."""


class TooLarge(WmiError):
    pass


class ZeroPartition(WmiError, ZeroDivisionError):
    pass
