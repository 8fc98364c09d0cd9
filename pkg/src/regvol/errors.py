"""Exception hierarchy shared by all regvol modules.

``exit_code`` is the process status the CLI uses for each error; 2 is left to
click's usage errors.
"""


class RegVolError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InvalidConfig(RegVolError, ValueError):
    """Sampling or estimation parameters violate a precondition."""

    exit_code = 3


class NotPositiveDefinite(RegVolError, ArithmeticError):
    """A Cholesky factorization failed; the matrix is not (numerically) SPD."""

    exit_code = 4


class SingularGram(RegVolError, ArithmeticError):
    """A Gram matrix X_S X_S^T is singular where an inverse is needed."""

    exit_code = 5


class TrialBudgetExceeded(RegVolError, RuntimeError):
    """Rejection sampling used more proposals than the configured cap."""

    exit_code = 6


class InstanceTooLarge(RegVolError, ValueError):
    """Exhaustive enumeration requested on an instance above the size guard."""

    exit_code = 7


class ParseError(RegVolError, ValueError):
    """A dataset file could not be parsed."""

    exit_code = 8

    def __init__(self, message, row=None, col=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"col {col}")
        if where:
            message = f"{message} at {' '.join(where)}"
        super().__init__(message)
        self.row = row
        self.col = col


class ArityMismatch(ParseError):
    exit_code = 9


class NonMonotoneIndex(ParseError):
    exit_code = 10


class EmptyDataset(RegVolError, ValueError):
    exit_code = 11


class DivisibilityError(RegVolError, ValueError):
    """The identity-block construction needs n divisible by d."""

    exit_code = 12


class VerificationFailure(RegVolError):
    """One or more verification checks failed."""

    exit_code = 13

    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("failed checks: " + ", ".join(self.failed))
