"""Exception hierarchy shared by every scnewton module."""

from typing import Any, List, Optional, Sequence


class ScNewtonError(Exception):
    """Base class for all errors raised by the toolkit."""


class ScalarDomainError(ScNewtonError, ValueError):
    """A scalar function was evaluated outside its domain."""

    def __init__(self, name: str, value: float, domain: str):
        self.name = name
        self.value = value
        self.domain = domain
        super().__init__(f"{name}({value!r}) is undefined: argument must satisfy {domain}")


class DimensionMismatchError(ScNewtonError, ValueError):
    """Vector or matrix sizes disagree."""

    def __init__(self, expected: Any, got: Any, what: str = "operand"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has shape {got}, expected {expected}")


class NotPositiveDefiniteError(ScNewtonError, ArithmeticError):
    """Cholesky factorization of a supposedly SPD matrix failed."""

    def __init__(self, dimension: int, detail: str = ""):
        self.dimension = dimension
        message = f"{dimension}x{dimension} matrix is not positive definite"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class DomainViolationError(ScNewtonError, ValueError):
    """A point outside the oracle domain was evaluated or produced."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        self.point = point
        super().__init__(message)


class InvalidConstantsError(ScNewtonError, ValueError):
    """Path-following constants failed validation."""

    def __init__(self, report: Any):
        self.report = report
        violated = ", ".join(report.violated) if getattr(report, "violated", None) else "unknown"
        super().__init__(f"constants {report.beta}/{report.gamma} ({report.variant}) violate: {violated}")


class CenteringLostError(ScNewtonError, RuntimeError):
    """An iterate left its approximate centering neighbourhood.

    This signals that the declared self-concordance constant (or barrier
    parameter) does not describe the oracle.
    """

    def __init__(self, residual: float, bound: float, where: str = "iterate"):
        self.residual = residual
        self.bound = bound
        super().__init__(f"{where}: centering residual {residual:.3e} exceeds {bound:.3e}")


class RootFindingError(ScNewtonError, RuntimeError):
    """A safeguarded scalar root search failed."""

    def __init__(self, message: str, history: Optional[List[tuple]] = None):
        self.history = list(history or [])
        super().__init__(f"{message} (bracketing history: {self.history[-5:]})")


class RankDeficientError(ScNewtonError, ValueError):
    """Gaussian elimination found linearly dependent constraint rows."""

    def __init__(self, dependent_rows: Sequence[int]):
        self.dependent_rows = list(dependent_rows)
        super().__init__(f"constraint matrix is rank deficient; dependent rows: {self.dependent_rows}")


class UnknownProblemError(ScNewtonError, KeyError):
    """The problem zoo has no instance with the requested name."""

    def __init__(self, name: str, known: Sequence[str]):
        self.name = name
        self.known = list(known)
        super().__init__(f"unknown problem {name!r}; known problems: {', '.join(self.known)}")


class ProblemFileError(ScNewtonError, ValueError):
    """A problem or LP file could not be parsed."""
