"""Ladder geometry: site indexing, nearest-neighbour bonds and sublattices.

Sites are indexed rung-major, ``site = rung * legs + leg``, so the sites of
any run of consecutive rungs form a contiguous index range.  Rungs run along
the legs; the optional periodic wrap joins rung ``M - 1`` to rung ``0`` on
every leg.  The transverse (rung) direction is always open.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field

from .errors import BoundaryConflictError, DomainError


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value) -> "Boundary":
        if isinstance(value, Boundary):
            return value
        key = str(value).strip().lower()
        aliases = {"periodicalonglegs": "periodic", "pbc": "periodic", "obc": "open"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown boundary mode {value!r}") from None


A, B = "A", "B"


@dataclass(frozen=True)
class LadderGeometry:
    legs: int
    rungs: int
    boundary: Boundary
    bonds: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.legs * self.rungs

    def site(self, rung: int, leg: int) -> int:
        return rung * self.legs + leg

    def coords(self, site: int) -> tuple[int, int]:
        """Return ``(rung, leg)`` of a site index."""
        return divmod(site, self.legs)

    @property
    def sublattice(self) -> tuple[str, ...]:
        return tuple(sublattice_of(self, s) for s in range(self.n))

    def rung_sites(self, rung: int) -> list[int]:
        return [self.site(rung, leg) for leg in range(self.legs)]

    def is_bipartite(self) -> bool:
        """True when every bond joins an A site to a B site."""
        return all(_parity(self, i) != _parity(self, j) for i, j in self.bonds)

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.bonds:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def is_connected(self) -> bool:
        adj = self.neighbours()
        seen = {0}
        queue = deque([0])
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return len(seen) == self.n

    @property
    def label(self) -> str:
        return f"{self.legs}x{self.rungs}-{self.boundary.value}"

    def to_dict(self) -> dict:
        return {
            "legs": self.legs,
            "rungs": self.rungs,
            "boundary": self.boundary.value,
            "bonds": [list(b) for b in self.bonds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "LadderGeometry":
        geom = build_ladder(data["legs"], data["rungs"], data["boundary"])
        if "bonds" in data:
            given = sorted(tuple(sorted(b)) for b in data["bonds"])
            if given != list(geom.bonds):
                raise DomainError("bond list does not match legs/rungs/boundary")
        return geom

    @classmethod
    def from_json(cls, text: str) -> "LadderGeometry":
        return cls.from_dict(json.loads(text))


def build_ladder(legs: int, rungs: int, boundary=Boundary.OPEN) -> LadderGeometry:
    """Build an ``legs x rungs`` ladder with nearest-neighbour bonds.

    Raises
    ------
    DomainError
        If ``legs`` or ``rungs`` is smaller than one.
    BoundaryConflictError
        For a periodic wrap with fewer than three rungs, where the wrap bond
        would duplicate an existing leg bond.
    """
    boundary = Boundary.parse(boundary)
    if int(legs) != legs or int(rungs) != rungs or legs < 1 or rungs < 1:
        raise DomainError(f"legs and rungs must be positive integers, got {legs}, {rungs}")
    legs, rungs = int(legs), int(rungs)
    if boundary is Boundary.PERIODIC and rungs < 3:
        raise BoundaryConflictError(
            f"periodic wrap needs at least 3 rungs, got {rungs}")
    bonds = set()
    for r in range(rungs):
        for l in range(legs):
            s = r * legs + l
            if l + 1 < legs:
                bonds.add((s, s + 1))
            if r + 1 < rungs:
                bonds.add((s, s + legs))
            elif boundary is Boundary.PERIODIC:
                bonds.add((l, s))
    return LadderGeometry(legs, rungs, boundary, tuple(sorted(bonds)))


def _parity(geometry: LadderGeometry, site: int) -> int:
    rung, leg = geometry.coords(site)
    return (rung + leg) % 2


def sublattice_of(geometry: LadderGeometry, site: int) -> str:
    """Checkerboard label: ``"A"`` when rung + leg is even, else ``"B"``."""
    if not 0 <= site < geometry.n:
        raise DomainError(f"site {site} outside 0..{geometry.n - 1}")
    return A if _parity(geometry, site) == 0 else B
