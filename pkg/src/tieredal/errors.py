"""Exception hierarchy shared across the package."""


class TieredALError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TieredALError, ValueError):
    """A precondition on an argument was violated."""


class FormatError(TieredALError, ValueError):
    """A serialized artifact is malformed.

    Carries the byte offset at which the problem was detected.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ValidationError(TieredALError, ValueError):
    """Deserialized content violates a domain invariant."""


class DegeneratePoolError(TieredALError, ValueError):
    """The labeled pool cannot support the requested operation."""


class NumericalDomainError(TieredALError, ArithmeticError):
    """A matrix factorization left its numerical domain.

    ``pivot`` is the 0-based index of the failing Cholesky pivot when known.
    """

    def __init__(self, message, pivot=None):
        if pivot is not None:
            message = f"{message} (failing pivot {pivot})"
        super().__init__(message)
        self.pivot = pivot


class InsufficientDataError(TieredALError, ValueError):
    """A statistic requires records in a category that is empty."""


class UnreachableTargetError(TieredALError, ValueError):
    """An accuracy target is not reached by a cost curve.

    ``curve`` names the offending curve ("a" or "b").
    """

    def __init__(self, message, curve):
        super().__init__(f"{message} (curve {curve!r})")
        self.curve = curve


class BudgetExhaustedError(TieredALError, RuntimeError):
    """The unlabeled pool cannot cover the per-round budget."""
