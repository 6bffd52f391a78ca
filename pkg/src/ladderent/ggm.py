"""Generalized geometric measure of pure states.

``GGM = 1 - max_K lambda_K^2`` where ``lambda_K^2`` is the largest squared
Schmidt coefficient of the split ``K : rest``.  Either every split is
scanned, or only subsets of a ``2 x L`` block of two adjacent rungs.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError
from .hilbert import (ReducedState, StateVector, amplitude_matrix, partial_trace)
from .lattice import Boundary, LadderGeometry

FULL_MAX_SITES = 16
TIE_TOL = 1e-9


class Strategy(str, enum.Enum):
    FULL = "full"
    RESTRICTED = "restricted"

    @classmethod
    def parse(cls, value) -> "Strategy":
        if isinstance(value, Strategy):
            return value
        key = str(value).strip().lower()
        key = {"restricted2xl": "restricted", "block": "restricted"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown strategy {value!r}") from None


@dataclass(frozen=True)
class BipartitionSpec:
    """One unordered split, stored as its canonical side ``sites``.

    The canonical side is the smaller one; for equal halves, the side
    holding the lowest site index.
    """

    n: int
    sites: tuple[int, ...]

    @classmethod
    def canonical(cls, n: int, sites) -> "BipartitionSpec":
        k = tuple(sorted(set(int(s) for s in sites)))
        if not k or len(k) >= n or k[0] < 0 or k[-1] >= n:
            raise DomainError(f"{k} is not a proper nonempty subset of {n} sites")
        rest = tuple(s for s in range(n) if s not in set(k))
        if len(rest) < len(k) or (len(rest) == len(k) and rest < k):
            k = rest
        return cls(n, k)

    @property
    def complement(self) -> tuple[int, ...]:
        chosen = set(self.sites)
        return tuple(s for s in range(self.n) if s not in chosen)

    def sort_key(self):
        return (len(self.sites), self.sites)


@dataclass
class GgmResult:
    value: float
    lambda_sq: float
    argmax: BipartitionSpec
    strategy: Strategy
    ties: list[BipartitionSpec] = field(default_factory=list)
    splits_examined: int = 0
    placements: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lambda_sq": self.lambda_sq,
            "argmax": list(self.argmax.sites),
            "strategy": self.strategy.value,
            "ties": [list(t.sites) for t in self.ties],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def block_placements(geometry: LadderGeometry) -> list[tuple[int, int]]:
    """Rung pairs scanned by the restricted strategy.

    The last two rungs always; open ladders add the central pair because
    they lack translation symmetry.
    """
    m = geometry.rungs
    if m < 2:
        return [(0, 0)]
    places = [(m - 2, m - 1)]
    if geometry.boundary is Boundary.OPEN:
        mid = (m // 2 - 1, m // 2)
        if mid not in places:
            places.append(mid)
    return places


def _block_sites(geometry: LadderGeometry, place: tuple[int, int]) -> list[int]:
    lo, hi = place
    return [s for r in range(lo, hi + 1) for s in geometry.rung_sites(r)]


def enumerate_bipartitions(n: int, strategy=Strategy.FULL,
                           geometry: LadderGeometry | None = None) -> list[BipartitionSpec]:
    """Canonical splits examined by a strategy, ordered by size then sites."""
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.FULL:
        if n > FULL_MAX_SITES:
            raise ResourceError(
                f"full enumeration limited to n <= {FULL_MAX_SITES}; use the restricted strategy")
        if n < 2:
            raise DomainError("a split needs at least two sites")
        splits = []
        for mask in range(1, 1 << (n - 1)):
            sites = [s for s in range(n - 1) if mask >> s & 1]
            splits.append(BipartitionSpec.canonical(n, sites))
    else:
        if geometry is None:
            raise DomainError("restricted strategy needs the ladder geometry")
        if geometry.n != n:
            raise DomainError("geometry does not match the state size")
        seen = set()
        splits = []
        for place in block_placements(geometry):
            block = _block_sites(geometry, place)
            for mask in range(1, 1 << len(block)):
                sites = [block[t] for t in range(len(block)) if mask >> t & 1]
                if len(sites) == n:
                    continue
                spec = BipartitionSpec.canonical(n, sites)
                if spec not in seen:
                    seen.add(spec)
                    splits.append(spec)
    splits.sort(key=BipartitionSpec.sort_key)
    return splits


def _largest_eigenvalue(rho: np.ndarray, floor: float) -> float:
    """Largest eigenvalue, or -1 when the purity bound shows it is below ``floor``."""
    purity = float(np.sum(np.abs(rho) ** 2))
    if np.sqrt(purity) < floor:
        return -1.0
    return float(np.linalg.eigvalsh(rho)[-1])


def _select(candidates: list[tuple[float, BipartitionSpec]], strategy, examined,
            placements=()) -> GgmResult:
    best = max(lam for lam, _ in candidates)
    ties = [spec for lam, spec in candidates if lam >= best - TIE_TOL]
    ties.sort(key=BipartitionSpec.sort_key)
    value = max(0.0, 1.0 - best)
    return GgmResult(value, best, ties[0], strategy, ties, examined, list(placements))


def compute_ggm(state: StateVector, strategy=Strategy.FULL,
                geometry: LadderGeometry | None = None) -> GgmResult:
    """GGM of a normalized pure state over the strategy's splits."""
    strategy = Strategy.parse(strategy)
    n = state.n
    if abs(state.norm() - 1.0) > 1e-8:
        raise DomainError("compute_ggm expects a normalized state")
    splits = enumerate_bipartitions(n, strategy, geometry)
    psi = state.dense()
    candidates: list[tuple[float, BipartitionSpec]] = []
    best = 0.0
    if strategy is Strategy.RESTRICTED:
        blocks = {}
        for place in block_placements(geometry):
            sites = _block_sites(geometry, place)
            if len(sites) == n:
                blocks[place] = (sites, None)
            else:
                mat = amplitude_matrix(psi, n, sites)
                blocks[place] = (sites, mat @ mat.conj().T)
    for spec in splits:
        floor = best - 2 * TIE_TOL
        if strategy is Strategy.RESTRICTED:
            rho = _restricted_rho(spec, blocks, psi, n)
        else:
            mat = amplitude_matrix(psi, n, spec.sites)
            rho = mat @ mat.conj().T
        lam = _largest_eigenvalue(rho, floor)
        if lam < 0:
            continue
        candidates.append((lam, spec))
        best = max(best, lam)
    placements = block_placements(geometry) if strategy is Strategy.RESTRICTED else ()
    return _select(candidates, strategy, len(splits), placements)


def _restricted_rho(spec, blocks, psi, n):
    for sites, rho_block in blocks.values():
        inside = set(sites)
        for side in (spec.sites, spec.complement):
            if set(side) <= inside:
                if rho_block is None:
                    mat = amplitude_matrix(psi, n, side)
                    return mat @ mat.conj().T
                return partial_trace(rho_block, sites, side)
    raise DomainError(f"split {spec.sites} lies outside every block")


def ggm_from_block(block: ReducedState, n: int) -> GgmResult:
    """Restricted GGM from the reduced state of a ``2 x L`` block alone.

    Every nonempty subset of the block is one side of a split whose other
    side is the rest of the ladder.
    """
    sites = list(block.sites)
    if len(sites) >= n:
        raise DomainError("block covers the whole system; use compute_ggm")
    candidates = []
    best = 0.0
    subsets = []
    for mask in range(1, 1 << len(sites)):
        subsets.append([sites[t] for t in range(len(sites)) if mask >> t & 1])
    subsets.sort(key=lambda s: (len(s), s))
    for sub in subsets:
        rho = partial_trace(block.matrix, sites, sub)
        lam = _largest_eigenvalue(rho, best - 2 * TIE_TOL)
        if lam < 0:
            continue
        candidates.append((lam, BipartitionSpec.canonical(n, sub)))
        best = max(best, lam)
    return _select(candidates, Strategy.RESTRICTED, len(subsets))


def validate_restricted_strategy(state: StateVector, geometry: LadderGeometry) -> dict:
    """Compare full and restricted GGM on one state; flag disagreements."""
    full = compute_ggm(state, Strategy.FULL, geometry)
    restricted = compute_ggm(state, Strategy.RESTRICTED, geometry)
    gap = restricted.value - full.value
    return {
        "geometry": geometry.label,
        "ggm_full": full.value,
        "ggm_restricted": restricted.value,
        "difference": gap,
        "agree": abs(gap) <= TIE_TOL,
        "argmax_full": list(full.argmax.sites),
        "argmax_restricted": list(restricted.argmax.sites),
        "placements": [list(p) for p in restricted.placements],
    }
