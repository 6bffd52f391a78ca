"""Exception types shared across the package.

Each class carries a ``category`` string used by the CLI when it writes
machine-readable error records.
"""


class LadderError(Exception):
    category = "error"


class DomainError(LadderError, ValueError):
    category = "domain"


class BoundaryConflictError(DomainError):
    category = "domain"


class ResourceError(LadderError):
    category = "resource"


class ConstructionError(LadderError):
    category = "construction"


class AmbiguityError(DomainError):
    category = "domain"


class ConvergenceError(LadderError):
    category = "convergence"

    def __init__(self, message, best_residual=float("nan"), energy=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual
        self.energy = energy
