"""Nearest-neighbour dimer coverings and their singlet-product states."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..lattice import LadderGeometry, sublattice_of

INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class DimerCovering:
    """Perfect matching of the bond graph; each pair is ``(A site, B site)``."""

    pairs: tuple[tuple[int, int], ...]

    def to_list(self) -> list[list[int]]:
        return [list(p) for p in self.pairs]


def _check_rvb_geometry(geometry: LadderGeometry) -> None:
    if geometry.n % 2:
        raise DomainError(f"{geometry.label} has an odd number of sites")
    if not geometry.is_bipartite():
        raise DomainError(
            f"{geometry.label} is not bipartite (odd number of rungs with a periodic wrap)")


def enumerate_dimer_coverings(geometry: LadderGeometry) -> list[DimerCovering]:
    """All nearest-neighbour dimer coverings, sorted by their pair lists.

    Backtracking always covers the lowest uncovered site next, so each
    matching is produced exactly once.
    """
    _check_rvb_geometry(geometry)
    adj = geometry.neighbours()
    n = geometry.n
    covered = [False] * n
    current: list[tuple[int, int]] = []
    found: list[DimerCovering] = []

    def orient(i, j):
        return (i, j) if sublattice_of(geometry, i) == "A" else (j, i)

    def search(start):
        s = start
        while s < n and covered[s]:
            s += 1
        if s == n:
            found.append(DimerCovering(tuple(sorted(current))))
            return
        covered[s] = True
        for t in adj[s]:
            if not covered[t]:
                covered[t] = True
                current.append(orient(s, t))
                search(s + 1)
                current.pop()
                covered[t] = False
        covered[s] = False

    search(0)
    found.sort(key=lambda c: c.pairs)
    return found


def coverings_to_json(coverings) -> str:
    return json.dumps([c.to_list() for c in coverings])


def coverings_from_json(text: str) -> list[DimerCovering]:
    return [DimerCovering(tuple(tuple(p) for p in c)) for c in json.loads(text)]


def _singlet_terms(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(pairs)
    k = len(pairs)
    choice = np.arange(1 << k, dtype=np.int64)
    index = np.zeros(1 << k, dtype=np.int64)
    sign = np.ones(1 << k)
    for p, (a, b) in enumerate(pairs):
        bit = (choice >> p) & 1
        # bit 0: a up, b down (+); bit 1: a down, b up (-)
        index |= np.where(bit == 1, 1 << a, 1 << b)
        sign = np.where(bit == 1, -sign, sign)
    return index, sign * INV_SQRT2 ** k


def singlet_product(pairs, n: int) -> np.ndarray:
    """Dense amplitudes of a product of singlets ``(|ud> - |du>)/sqrt2``.

    The first site of every pair carries the up spin in the positive term.
    """
    amps = np.zeros(1 << n)
    index, values = _singlet_terms(pairs)
    amps[index] = values
    return amps


def covering_sum(coverings, n: int) -> np.ndarray:
    """Unnormalized equal-weight sum of the coverings' singlet products."""
    total = np.zeros(1 << n)
    for c in coverings:
        index, values = _singlet_terms(c.pairs)
        total[index] += values
    return total
