"""Exception hierarchy shared by all modules."""


class PadicDynError(Exception):
    """Base class for library errors."""


class UsageError(PadicDynError, ValueError):
    """Caller misuse: mixed fields, bad normalization, malformed input."""


class PrecisionError(PadicDynError, ArithmeticError):
    """An operation needs more precision than the operands carry."""


class DomainError(PadicDynError, ValueError):
    """A mathematical precondition fails: p | d, point outside the
    certified disk, no simple root at this precision, non-normal
    extension, and the like."""


class BudgetError(PadicDynError, RuntimeError):
    """A configured resource budget (truncation order, tree degree,
    coefficient size) would be exceeded."""


class InternalError(PadicDynError, RuntimeError):
    """A condition the library guarantees cannot occur did occur."""
