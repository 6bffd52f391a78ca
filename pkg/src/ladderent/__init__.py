"""Genuine multisite entanglement of spin-1/2 Heisenberg ladders.

Exact ground states by Lanczos, RVB states by covering enumeration and by
rung-transfer recursion, the generalized geometric measure (GGM) and
finite-size scaling of the GGM.
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguityError,
    BoundaryConflictError,
    ConstructionError,
    ConvergenceError,
    DomainError,
    LadderError,
    ResourceError,
)
from .lattice import Boundary, LadderGeometry, build_ladder, sublattice_of

__all__ = [
    "AmbiguityError",
    "Boundary",
    "BoundaryConflictError",
    "ConstructionError",
    "ConvergenceError",
    "DomainError",
    "LadderError",
    "LadderGeometry",
    "ResourceError",
    "build_ladder",
    "sublattice_of",
]
