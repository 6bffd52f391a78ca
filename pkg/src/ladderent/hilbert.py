"""Spin basis, pure states and reduced density matrices.

Basis convention: bit ``i`` of a basis index is the spin at site ``i``,
0 for up and 1 for down.  Reduced density matrices use the same convention
on the kept sites: the first listed site is the least significant bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numba
import numpy as np

from .errors import DomainError, ResourceError

HERMITICITY_TOL = 1e-12
SPECTRUM_TOL = 1e-10
MAX_SITES = 26
MAX_RDM_SITES = 14
JSON_MAX_SITES = 12

_MAGIC = b"LSV1"
_HEADER = struct.Struct("<4sIiBQ")


@numba.njit(cache=True)
def _fixed_popcount_states(n, k):
    out = np.empty(_binom(n, k), dtype=np.int64)
    if k == 0:
        out[0] = 0
        return out
    s = (1 << k) - 1
    limit = 1 << n
    i = 0
    while s < limit:
        out[i] = s
        i += 1
        # Gosper's hack: next integer with the same popcount
        c = s & -s
        r = s + c
        s = (((r ^ s) >> 2) // c) | r
    return out


@numba.njit(cache=True)
def _binom(n, k):
    if k < 0 or k > n:
        return 0
    r = 1
    for i in range(1, k + 1):
        r = r * (n - k + i) // i
    return r


@lru_cache(maxsize=8)
def fixed_down_basis(n: int, n_down: int) -> np.ndarray:
    """Sorted basis integers of ``n`` spins with exactly ``n_down`` down spins."""
    if n < 1 or n > MAX_SITES:
        raise DomainError(f"n must lie in 1..{MAX_SITES}, got {n}")
    if not 0 <= n_down <= n:
        raise DomainError(f"n_down must lie in 0..{n}, got {n_down}")
    basis = _fixed_popcount_states(n, n_down)
    basis.setflags(write=False)
    return basis


def sz_zero_basis(n: int) -> np.ndarray:
    """All ``n``-bit integers with ``n/2`` set bits, strictly increasing."""
    if n < 2 or n % 2:
        raise DomainError(f"Sz=0 sector needs an even positive n, got {n}")
    return fixed_down_basis(n, n // 2)


def default_down_count(n: int) -> int:
    """Down-spin count of the lowest |Sz| sector (Sz = 0, or +1/2 for odd n)."""
    return n // 2


class BasisIndex:
    """Constant-time lookup from basis integer to sector position.

    The integer is split into a high and a low half; the position is
    ``offset[high] + rank[low]`` where ``rank`` orders low halves of equal
    popcount.  Both tables have ``2**(n/2)`` entries.
    """

    def __init__(self, n: int, n_down: int):
        self.n = n
        self.n_down = n_down
        self.states = fixed_down_basis(n, n_down)
        self.low_bits = n // 2
        low = np.arange(1 << self.low_bits, dtype=np.int64)
        pop = _popcount(low)
        rank = np.zeros_like(low)
        for p in range(self.low_bits + 1):
            sel = pop == p
            rank[sel] = np.arange(int(sel.sum()))
        high = self.states >> self.low_bits
        offset = np.full(1 << (n - self.low_bits), -1, dtype=np.int64)
        uniq, first = np.unique(high, return_index=True)
        offset[uniq] = first
        self.rank = rank
        self.offset = offset

    def lookup(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        return self.offset[states >> self.low_bits] + self.rank[states & ((1 << self.low_bits) - 1)]


@lru_cache(maxsize=8)
def basis_index(n: int, n_down: int) -> BasisIndex:
    return BasisIndex(n, n_down)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).copy()
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x >>= 1
    return count


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``n`` spin-1/2 sites.

    ``amplitudes`` has length ``2**n`` when ``n_down`` is None, otherwise it
    holds coefficients on :func:`fixed_down_basis` of that sector.
    ``normalized`` flags whether the norm has been fixed to one.
    """

    n: int
    amplitudes: np.ndarray
    n_down: int | None = None
    normalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if not np.issubdtype(amps.dtype, np.complexfloating):
            amps = amps.astype(np.float64, copy=False)
        amps = np.ascontiguousarray(amps)
        expected = (1 << self.n) if self.n_down is None else comb(self.n, self.n_down)
        if amps.ndim != 1 or amps.size != expected:
            raise DomainError(
                f"amplitude array of shape {amps.shape} does not match n={self.n}, "
                f"n_down={self.n_down} (expected {expected})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def is_sector(self) -> bool:
        return self.n_down is not None

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.n, self.amplitudes / nrm, self.n_down, True)

    def dense(self) -> np.ndarray:
        """Amplitudes on the full ``2**n`` basis."""
        if self.n_down is None:
            return self.amplitudes
        full = np.zeros(1 << self.n, dtype=self.amplitudes.dtype)
        full[fixed_down_basis(self.n, self.n_down)] = self.amplitudes
        return full

    def to_sector(self, n_down: int | None = None, atol: float = 1e-12) -> "StateVector":
        """Compress onto a fixed down-count sector; weight outside must vanish."""
        if self.n_down is not None:
            if n_down is not None and n_down != self.n_down:
                raise DomainError("state lives in a different sector")
            return self
        if n_down is None:
            n_down = default_down_count(self.n)
        basis = fixed_down_basis(self.n, n_down)
        amps = self.amplitudes[basis]
        leak = self.norm() ** 2 - float(np.sum(np.abs(amps) ** 2))
        if leak > atol:
            raise DomainError(f"state has weight {leak:.3e} outside the sector")
        return StateVector(self.n, amps, n_down, self.normalized)

    def vdot(self, other: "StateVector") -> complex:
        if self.n != other.n:
            raise DomainError("states act on different numbers of sites")
        if self.n_down is not None and self.n_down == other.n_down:
            return complex(np.vdot(self.amplitudes, other.amplitudes))
        return complex(np.vdot(self.dense(), other.dense()))

    # serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        n_down = -1 if self.n_down is None else self.n_down
        header = _HEADER.pack(_MAGIC, self.n, n_down, int(self.normalized), amps.size)
        pairs = np.empty((amps.size, 2), dtype="<f8")
        pairs[:, 0] = amps.real
        pairs[:, 1] = amps.imag
        return header + pairs.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateVector":
        magic, n, n_down, normalized, length = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise DomainError("not a state-vector file")
        body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=2 * length)
        body = body.reshape(length, 2)
        amps = body[:, 0] + 1j * body[:, 1]
        return cls(n, amps, None if n_down < 0 else n_down, bool(normalized))

    def to_json(self) -> str:
        if self.n > JSON_MAX_SITES:
            raise ResourceError(f"JSON export limited to n <= {JSON_MAX_SITES}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        return json.dumps({
            "n": self.n,
            "n_down": self.n_down,
            "normalized": self.normalized,
            "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
        })

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        data = json.loads(text)
        pairs = np.asarray(data["amplitudes"], dtype=np.float64).reshape(-1, 2)
        amps = pairs[:, 0] + 1j * pairs[:, 1]
        return cls(data["n"], amps, data.get("n_down"), bool(data.get("normalized", False)))


@dataclass(frozen=True, eq=False)
class ReducedState:
    sites: tuple[int, ...]
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def check(self, normalized: bool = True) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITICITY_TOL * max(1.0, self.trace):
            raise DomainError("reduced state is not Hermitian")
        ev = self.eigenvalues()
        if ev[0] < -SPECTRUM_TOL:
            raise DomainError(f"reduced state has negative eigenvalue {ev[0]:.3e}")
        if normalized and abs(self.trace - 1.0) > SPECTRUM_TOL:
            raise DomainError(f"reduced state trace {self.trace} differs from 1")


def _check_subset(n: int, sites) -> tuple[int, ...]:
    sites = tuple(int(s) for s in sites)
    if not sites:
        raise DomainError("subset must be nonempty")
    if len(set(sites)) != len(sites):
        raise DomainError(f"subset {sites} has repeated sites")
    if any(not 0 <= s < n for s in sites):
        raise DomainError(f"subset {sites} has sites outside 0..{n - 1}")
    if len(sites) == n:
        raise DomainError("subset must not contain every site")
    return sites


def amplitude_matrix(psi: np.ndarray, n: int, sites) -> np.ndarray:
    """Reshape a dense amplitude vector into ``kept x rest`` form.

    Row index bit ``t`` is the spin of ``sites[t]``.
    """
    tensor = psi.reshape((2,) * n)
    kept = [n - 1 - s for s in reversed(sites)]
    kept_set = set(sites)
    rest = [n - 1 - s for s in reversed(range(n)) if s not in kept_set]
    return tensor.transpose(kept + rest).reshape(1 << len(sites), -1)


def reduced_density_matrix(state: StateVector, sites) -> ReducedState:
    """Trace out every site not in ``sites``."""
    sites = _check_subset(state.n, sites)
    if len(sites) > MAX_RDM_SITES:
        raise ResourceError(f"reduced state on {len(sites)} sites exceeds {MAX_RDM_SITES}")
    mat = amplitude_matrix(state.dense(), state.n, sites)
    rho = mat @ mat.conj().T
    return ReducedState(sites, rho)


def max_schmidt_sq(state: StateVector, sites) -> float:
    """Largest squared Schmidt coefficient of the ``sites : rest`` split.

    The eigenproblem is solved on whichever side of the cut is smaller.
    """
    sites = _check_subset(state.n, sites)
    return _max_schmidt_sq_dense(state.dense(), state.n, sites)


def _max_schmidt_sq_dense(psi: np.ndarray, n: int, sites) -> float:
    if 2 * len(sites) > n:
        chosen = set(sites)
        sites = tuple(s for s in range(n) if s not in chosen)
    if len(sites) > MAX_RDM_SITES:
        raise ResourceError(f"reduced state on {len(sites)} sites exceeds {MAX_RDM_SITES}")
    mat = amplitude_matrix(psi, n, sites)
    rho = mat @ mat.conj().T
    return float(np.linalg.eigvalsh(rho)[-1])


def product_state(spins) -> StateVector:
    """Computational basis state; ``spins[i]`` is 0 (up) or 1 (down) at site i."""
    index = sum(int(b) << i for i, b in enumerate(spins))
    amps = np.zeros(1 << len(spins))
    amps[index] = 1.0
    return StateVector(len(spins), amps, normalized=True)


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def partial_trace(rho: np.ndarray, sites, keep) -> np.ndarray:
    """Reduce a density matrix on ``sites`` to the ordered subset ``keep``.

    Bit ``t`` of ``rho``'s row index is the spin of ``sites[t]``; the result
    follows the same convention for ``keep``.
    """
    sites = list(sites)
    keep = list(keep)
    k = len(sites)
    if rho.shape != (1 << k, 1 << k):
        raise DomainError("density matrix does not match its site list")
    pos = {s: t for t, s in enumerate(sites)}
    if any(s not in pos for s in keep) or len(set(keep)) != len(keep):
        raise DomainError(f"cannot keep {keep} from {sites}")
    if len(keep) == k and keep == sites:
        return rho
    # tensor axis a carries bit k-1-a
    row = [_LETTERS[t] for t in range(k)]
    col = [_LETTERS[k + t] for t in range(k)]
    keep_set = set(pos[s] for s in keep)
    for t in range(k):
        if t not in keep_set:
            col[t] = row[t]
    lhs = "".join(row[k - 1 - a] for a in range(k)) + "".join(col[k - 1 - a] for a in range(k))
    kept_bits = [pos[s] for s in keep]
    out_row = "".join(row[t] for t in reversed(kept_bits))
    out_col = "".join(col[t] for t in reversed(kept_bits))
    red = np.einsum(f"{lhs}->{out_row}{out_col}", rho.reshape((2,) * (2 * k)))
    dim = 1 << len(keep)
    return red.reshape(dim, dim)
