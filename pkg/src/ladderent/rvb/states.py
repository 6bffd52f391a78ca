"""RVB ladder states by enumeration and by rung recursion.

``build_rvb_recursive_*`` grow the ladder one rung at a time keeping one
partial state per set of legs whose dimers cross into the next rung.  For
two-leg open ladders this reduces to the familiar two-term form
``|M+2> = |M+1>|1> + |M>|2bar>``, which :func:`two_rung_recursion` also
implements literally.  The literal two-rung forms miss coverings whose leg
dimers are staggered across consecutive cuts, so they agree with the full
covering sum only for one-leg ladders and for open two-leg ladders; the
rung recursion agrees everywhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ConstructionError, DomainError, ResourceError
from ..hilbert import StateVector
from ..lattice import Boundary, LadderGeometry, build_ladder
from .coverings import (INV_SQRT2, _check_rvb_geometry, covering_sum,
                        enumerate_dimer_coverings, singlet_product)
from .transfer import rung_pairs

MAX_SITES = 24


class Construction(str, enum.Enum):
    ENUMERATION = "enumeration"
    RECURSION = "recursion"
    TWO_RUNG = "two-rung"


@dataclass(frozen=True, eq=False)
class RvbState:
    """Unnormalized equal-weight covering sum plus provenance."""

    geometry: LadderGeometry
    raw: np.ndarray
    covering_count: int
    construction: Construction

    @property
    def norm_sq(self) -> float:
        return float(np.sum(self.raw ** 2))

    @property
    def raw_state(self) -> StateVector:
        return StateVector(self.geometry.n, self.raw)

    @property
    def state(self) -> StateVector:
        return self.raw_state.normalize()


def _check_even_rungs(geometry: LadderGeometry) -> None:
    if geometry.rungs % 2:
        raise DomainError(
            f"RVB construction needs an even number of rungs, got {geometry.rungs}")
    if geometry.n > MAX_SITES:
        raise ResourceError(f"{geometry.n} sites exceed the state-vector budget {MAX_SITES}")


def build_rvb_enumerated(geometry: LadderGeometry) -> RvbState:
    """Sum the singlet products of every nearest-neighbour dimer covering."""
    _check_even_rungs(geometry)
    coverings = enumerate_dimer_coverings(geometry)
    if not coverings:
        raise ConstructionError(f"{geometry.label} has no dimer covering")
    raw = covering_sum(coverings, geometry.n)
    return RvbState(geometry, raw, len(coverings), Construction.ENUMERATION)


def _oriented_amp(spin_u, spin_v, u_is_a: bool):
    """Singlet amplitude for spins of sites u, v; arrays broadcast."""
    spin_a = spin_u if u_is_a else spin_v
    return np.where(spin_u != spin_v, np.where(spin_a == 0, INV_SQRT2, -INV_SQRT2), 0.0)


def _rung_amp(sigma: int, pairs, rung: int) -> float:
    amp = 1.0
    for l0, l1 in pairs:
        s0, s1 = sigma >> l0 & 1, sigma >> l1 & 1
        if s0 == s1:
            return 0.0
        spin_a = s0 if (rung + l0) % 2 == 0 else s1
        amp *= INV_SQRT2 if spin_a == 0 else -INV_SQRT2
    return amp


def _grow(legs: int, rungs: int, wrap: int, target: int):
    """Partial covering sums of rungs ``0..rungs-1``.

    ``wrap`` is the set of rung-0 legs left free for a wrap dimer and
    ``target`` the set of legs that must cross out of the last rung.
    Returns ``(vector, count)`` or ``(None, 0)``.
    """
    full = (1 << legs) - 1
    states: dict[int, tuple[np.ndarray, int]] = {}
    for s_out in range(1 << legs):
        if wrap & s_out or (rungs == 1 and s_out != target):
            continue
        pairs = rung_pairs(full & ~(wrap | s_out), legs)
        if pairs is None:
            continue
        vec = np.array([_rung_amp(s, pairs, 0) for s in range(1 << legs)])
        states[s_out] = (vec, 1)
    for r in range(1, rungs):
        width = legs * r
        idx = np.arange(1 << width, dtype=np.int64)
        new: dict[int, list] = {}
        for s_in, (vec, count) in states.items():
            in_legs = [l for l in range(legs) if s_in >> l & 1]
            prev = {l: (idx >> ((r - 1) * legs + l)) & 1 for l in in_legs}
            for s_out in range(1 << legs):
                if s_out & s_in or (r == rungs - 1 and s_out != target):
                    continue
                pairs = rung_pairs(full & ~(s_in | s_out), legs)
                if pairs is None:
                    continue
                entry = new.setdefault(s_out, [np.zeros(1 << (width + legs)), 0])
                entry[1] += count
                buf = entry[0]
                for sigma in range(1 << legs):
                    g = _rung_amp(sigma, pairs, r)
                    if g == 0.0:
                        continue
                    w = vec * g
                    for l in in_legs:
                        w = w * _oriented_amp(prev[l], sigma >> l & 1, (r - 1 + l) % 2 == 0)
                    buf[sigma << width:(sigma + 1) << width] += w
        states = {k: (v[0], v[1]) for k, v in new.items()}
    if target not in states:
        return None, 0
    return states[target]


def build_rvb_recursive_open(rungs: int, legs: int) -> RvbState:
    """Open ``legs x rungs`` RVB ladder grown rung by rung."""
    geometry = build_ladder(legs, rungs, Boundary.OPEN)
    _check_even_rungs(geometry)
    vec, count = _grow(legs, rungs, 0, 0)
    if vec is None:
        raise ConstructionError(f"{geometry.label} has no dimer covering")
    return RvbState(geometry, vec, count, Construction.RECURSION)


def build_rvb_recursive_periodic(rungs: int, legs: int) -> RvbState:
    """Periodic ``legs x rungs`` RVB ladder.

    Sums, over every set ``S`` of legs carrying a wrap dimer, the open
    recursion that leaves those legs free on rung 0 and open on the last
    rung, then closes the wrap singlets.
    """
    if rungs < 4:
        raise DomainError(f"periodic RVB recursion needs at least 4 rungs, got {rungs}")
    geometry = build_ladder(legs, rungs, Boundary.PERIODIC)
    _check_even_rungs(geometry)
    n = geometry.n
    idx = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(1 << n)
    count = 0
    for wrap in range(1 << legs):
        vec, c = _grow(legs, rungs, wrap, wrap)
        if vec is None:
            continue
        for l in range(legs):
            if wrap >> l & 1:
                last = (idx >> geometry.site(rungs - 1, l)) & 1
                first = (idx >> geometry.site(0, l)) & 1
                vec = vec * _oriented_amp(last, first, (rungs - 1 + l) % 2 == 0)
        total += vec
        count += c
    if count == 0:
        raise ConstructionError(f"{geometry.label} has no dimer covering")
    return RvbState(geometry, total, count, Construction.RECURSION)


def build_rvb_recursive(geometry: LadderGeometry) -> RvbState:
    if geometry.boundary is Boundary.PERIODIC:
        return build_rvb_recursive_periodic(geometry.rungs, geometry.legs)
    return build_rvb_recursive_open(geometry.rungs, geometry.legs)


# ---------------------------------------------------------------------------
# Two-rung objects |1>, |2>, |2bar> and the literal two-rung recursions


@lru_cache(maxsize=None)
def rung_block(legs: int, rungs: int, parity: int) -> np.ndarray:
    """Covering sum of an open ``legs x rungs`` block whose first rung has the given parity.

    Returns the zero vector when the block has no covering.
    """
    n = legs * rungs
    if n % 2:
        return np.zeros(1 << n)
    local = build_ladder(legs, rungs, Boundary.OPEN)
    total = np.zeros(1 << n)
    for c in enumerate_dimer_coverings(local):
        pairs = []
        for a, b in c.pairs:
            ra, la = divmod(a, legs)
            pairs.append((a, b) if (ra + parity + la) % 2 == 0 else (b, a))
        total += singlet_product(pairs, n)
    total.setflags(write=False)
    return total


def two_bar(legs: int, parity: int) -> np.ndarray:
    """``|2bar> = |2> - |1>|1>``: two-rung coverings with at least one leg dimer."""
    return rung_block(legs, 2, parity) - np.kron(rung_block(legs, 1, 1 - parity),
                                                 rung_block(legs, 1, parity))


def embed(parts, n: int) -> np.ndarray:
    """Tensor product of ``(vector, sites)`` parts, reordered to global site order."""
    vec = np.ones(1)
    sites: list[int] = []
    for v, s in parts:
        vec = np.kron(v, vec)
        sites = sites + list(s)
    if sorted(sites) != list(range(n)):
        raise DomainError("parts do not tile the system")
    k = len(sites)
    order = [0] * n
    for axis in range(k):
        order[n - 1 - sites[k - 1 - axis]] = axis
    return vec.reshape((2,) * k).transpose(order).reshape(-1)


def _rung_range(legs: int, start: int, stop: int) -> list[int]:
    return [r * legs + l for r in range(start, stop) for l in range(legs)]


def _two_rung_open(legs: int, rungs: int, offset: int) -> np.ndarray:
    """``|K+2> = |K+1>|1> + |K>|2bar>`` on rungs ``offset..offset+rungs-1``."""
    states = {0: np.ones(1), 1: rung_block(legs, 1, offset % 2)}
    for k in range(2, rungs + 1):
        last = (offset + k - 1) % 2
        states[k] = (np.kron(rung_block(legs, 1, last), states[k - 1])
                     + np.kron(two_bar(legs, 1 - last), states[k - 2]))
    return states[rungs]


def two_rung_recursion(legs: int, rungs: int, boundary=Boundary.OPEN) -> np.ndarray:
    """Unnormalized ladder state from the literal two-rung recursions.

    Open: ``|M+2> = |M+1>|1> + |M>|2bar>``.  Periodic, even legs:
    ``|M+2>^P = |M+2> + |M>_{2..m+1} |2bar>_{m+2,1}``.  Periodic, odd legs:
    ``|M+2>^P = |M>_{1..m}|2>_{m+1,m+2} + |M>_{2..m+1}|2>_{m+2,1}``.
    Exact for one leg and for open two-leg ladders only.
    """
    boundary = Boundary.parse(boundary)
    n = legs * rungs
    if n > MAX_SITES:
        raise ResourceError(f"{n} sites exceed the state-vector budget {MAX_SITES}")
    if rungs % 2:
        raise DomainError("two-rung recursion needs an even number of rungs")
    if boundary is Boundary.OPEN:
        return _two_rung_open(legs, rungs, 0)
    if rungs < 4:
        raise DomainError("periodic two-rung recursion needs at least 4 rungs")
    wrap_sites = _rung_range(legs, rungs - 1, rungs) + _rung_range(legs, 0, 1)
    shifted = _two_rung_open(legs, rungs - 2, 1)
    if legs % 2 == 0:
        return (_two_rung_open(legs, rungs, 0)
                + embed([(shifted, _rung_range(legs, 1, rungs - 1)),
                         (two_bar(legs, 1), wrap_sites)], n))
    first = embed([(_two_rung_open(legs, rungs - 2, 0), _rung_range(legs, 0, rungs - 2)),
                   (rung_block(legs, 2, 0), _rung_range(legs, rungs - 2, rungs))], n)
    second = embed([(shifted, _rung_range(legs, 1, rungs - 1)),
                    (rung_block(legs, 2, 1), wrap_sites)], n)
    return first + second
