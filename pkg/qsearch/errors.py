class QSearchError(Exception):
    """Base class for errors raised by qsearch."""


class DomainError(QSearchError, ValueError):
    """An argument lies outside the domain of the operation (bad index, width mismatch, degenerate cut)."""


class ContractViolationError(QSearchError, ValueError):
    """An input breaks a structural contract: non-unitary gate, non-normalized state, invalid density matrix."""


class WitnessDisagreementError(QSearchError, RuntimeError):
    """Purity, Schmidt rank and entropy disagree about a product-state verdict.

    This signals a bug in the simulator, never a user error.
    """


class UsageError(QSearchError, ValueError):
    """Invalid experiment configuration or report request."""
