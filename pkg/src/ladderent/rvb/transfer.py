"""Rung-by-rung transfer representation of nearest-neighbour RVB ladders.

Cutting the ladder between rungs ``r`` and ``r + 1`` crosses a set ``S`` of
leg dimers.  A bond state ``(S, alpha)`` records that set together with the
spins ``alpha`` of the crossing dimers' left ends, so the RVB state is a
matrix product over rungs with bond dimension ``3**L``.  For a rung
configuration ``sigma`` the rung tensor is nonzero when

* every leg in ``S_in`` closes a singlet with the previous rung,
* every leg in ``S_out`` opens one (its spin is copied into ``alpha_out``),
* the remaining legs are covered by rung dimers, which is possible in
  exactly one way when every run of consecutive remaining legs is even.

Open ladders start and end on the empty bond; periodic ladders take the
trace over the wrap bond.  Norms and ``2 x L`` block density matrices
follow from left/right environments, which is what lets the block
reduced state of long ladders be computed without the full state vector.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..errors import DomainError, ResourceError

INV_SQRT2 = 1.0 / np.sqrt(2.0)
MAX_LEGS_OPEN = 5
MAX_LEGS_PERIODIC = 4


def rung_pairs(mask: int, legs: int) -> list[tuple[int, int]] | None:
    """Leg pairs covering ``mask`` with rung dimers, or None if impossible."""
    pairs = []
    l = 0
    while l < legs:
        if mask >> l & 1:
            if l + 1 < legs and mask >> (l + 1) & 1:
                pairs.append((l, l + 1))
                l += 2
                continue
            return None
        l += 1
    return pairs


def singlet_amplitude(spin_a: int, spin_b: int) -> float:
    """``<spin_a spin_b|(|ud> - |du>)/sqrt2`` with ``a`` on sublattice A."""
    if spin_a == spin_b:
        return 0.0
    return INV_SQRT2 if spin_a == 0 else -INV_SQRT2


@lru_cache(maxsize=None)
def bond_states(legs: int) -> tuple[tuple[int, int], ...]:
    """All ``(S, alpha)`` with ``alpha`` a sub-mask of ``S``; index 0 is empty."""
    out = []
    for s in range(1 << legs):
        sub = s
        subs = []
        while True:
            subs.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & s
        out.extend((s, a) for a in sorted(subs))
    return tuple(out)


@lru_cache(maxsize=None)
def rung_tensors(legs: int, parity: int) -> tuple[sp.csr_matrix, ...]:
    """Sparse rung tensors ``A[sigma]`` (bond x bond) for a rung of given parity.

    ``parity`` is the rung index modulo two; site ``(r, l)`` is on sublattice
    A when ``r + l`` is even.
    """
    bonds = bond_states(legs)
    index = {b: i for i, b in enumerate(bonds)}
    full = (1 << legs) - 1
    rows = [[] for _ in range(1 << legs)]
    cols = [[] for _ in range(1 << legs)]
    vals = [[] for _ in range(1 << legs)]
    for (s_in, a_in) in bonds:
        for s_out in range(1 << legs):
            if s_in & s_out:
                continue
            pairs = rung_pairs(full & ~(s_in | s_out), legs)
            if pairs is None:
                continue
            for sigma in range(1 << legs):
                amp = 1.0
                for l in range(legs):
                    if s_in >> l & 1:
                        prev_spin = a_in >> l & 1
                        spin = sigma >> l & 1
                        # left end sits on rung r - 1
                        if (parity - 1 + l) % 2 == 0:
                            amp *= singlet_amplitude(prev_spin, spin)
                        else:
                            amp *= singlet_amplitude(spin, prev_spin)
                        if amp == 0.0:
                            break
                if amp == 0.0:
                    continue
                for l0, l1 in pairs:
                    s0, s1 = sigma >> l0 & 1, sigma >> l1 & 1
                    if (parity + l0) % 2 == 0:
                        amp *= singlet_amplitude(s0, s1)
                    else:
                        amp *= singlet_amplitude(s1, s0)
                    if amp == 0.0:
                        break
                if amp == 0.0:
                    continue
                a_out = sigma & s_out
                rows[sigma].append(index[(s_in, a_in)])
                cols[sigma].append(index[(s_out, a_out)])
                vals[sigma].append(amp)
    dim = len(bonds)
    return tuple(sp.csr_matrix((vals[s], (rows[s], cols[s])), shape=(dim, dim))
                 for s in range(1 << legs))


def _check_legs(legs: int, periodic: bool) -> None:
    limit = MAX_LEGS_PERIODIC if periodic else MAX_LEGS_OPEN
    if legs < 1:
        raise DomainError("legs must be positive")
    if legs > limit:
        kind = "periodic" if periodic else "open"
        raise ResourceError(f"{kind} transfer contraction supports at most {limit} legs")


def _dense(mats) -> np.ndarray:
    return np.stack([m.toarray() for m in mats])


def mps_state(legs: int, rungs: int, periodic: bool) -> np.ndarray:
    """Dense unnormalized RVB amplitudes contracted from the rung tensors."""
    if legs * rungs > 22:
        raise ResourceError("dense contraction limited to 22 sites")
    a = [_dense(rung_tensors(legs, p)) for p in (0, 1)]
    dim = a[0].shape[1]
    # psi[config of rungs 0..r, start bond, current bond]
    starts = range(dim) if periodic else [0]
    total = np.zeros(1 << (legs * rungs))
    for b0 in starts:
        psi = a[0][:, b0, :]
        for r in range(1, rungs):
            nxt = np.einsum("ob,sbc->soc", psi, a[r % 2])
            psi = nxt.reshape(-1, dim)
        total += psi[:, b0]
    return total


def transfer_superoperator(legs: int, parity: int) -> sp.csr_matrix:
    """``sum_sigma A[sigma] (x) A[sigma]`` acting on bra-ket bond pairs."""
    mats = rung_tensors(legs, parity)
    out = sp.kron(mats[0], mats[0], format="csr")
    for m in mats[1:]:
        out = out + sp.kron(m, m, format="csr")
    return out.tocsr()


def _left_env(legs: int, first: int, stop: int) -> np.ndarray:
    """Open-chain environment of rungs ``first..stop-1`` starting on the empty bond."""
    mats = [rung_tensors(legs, p) for p in (0, 1)]
    dim = mats[0][0].shape[0]
    env = np.zeros((dim, dim))
    env[0, 0] = 1.0
    for r in range(first, stop):
        env = sum((m.T @ (m.T @ env.T).T) for m in mats[r % 2])
    return np.asarray(env)


def _right_env(legs: int, first: int, stop: int) -> np.ndarray:
    """Environment of rungs ``first..stop-1`` ending on the empty bond."""
    mats = [rung_tensors(legs, p) for p in (0, 1)]
    dim = mats[0][0].shape[0]
    env = np.zeros((dim, dim))
    env[0, 0] = 1.0
    for r in reversed(range(first, stop)):
        env = sum((m @ (m @ env.T).T) for m in mats[r % 2])
    return np.asarray(env)


def open_norms(legs: int, max_rungs: int) -> dict[int, float]:
    """``<M|M>`` of the unnormalized open RVB ladder for ``M = 1..max_rungs``."""
    _check_legs(legs, periodic=False)
    mats = [rung_tensors(legs, p) for p in (0, 1)]
    dim = mats[0][0].shape[0]
    env = np.zeros((dim, dim))
    env[0, 0] = 1.0
    out = {}
    for r in range(max_rungs):
        env = sum((m.T @ (m.T @ env.T).T) for m in mats[r % 2])
        out[r + 1] = float(env[0, 0])
    return out


def periodic_norms(legs: int, max_rungs: int) -> dict[int, float]:
    """``<M|M>`` of the unnormalized periodic RVB ladder for even ``M >= 4``."""
    _check_legs(legs, periodic=True)
    t = [transfer_superoperator(legs, p) for p in (0, 1)]
    pair = (t[0] @ t[1]).tocsr()
    env = np.eye(pair.shape[0])
    out = {}
    for m in range(2, max_rungs + 1, 2):
        env = _advance(env, pair)
        if m >= 4:
            out[m] = float(np.trace(env))
    return out


def _advance(env: np.ndarray, op: sp.csr_matrix) -> np.ndarray:
    """Dense ``env @ op`` for sparse ``op``."""
    return np.ascontiguousarray((op.T @ env.T).T)


def _block_products(legs: int, first_parity: int) -> np.ndarray:
    """``P[s1 + 2**L s2] = A[s1] @ A[s2]`` for a two-rung block."""
    a1 = rung_tensors(legs, first_parity)
    a2 = rung_tensors(legs, 1 - first_parity)
    dim = a1[0].shape[0]
    size = 1 << legs
    out = np.empty((size * size, dim, dim))
    for s2 in range(size):
        for s1 in range(size):
            out[s1 + size * s2] = (a1[s1] @ a2[s2]).toarray()
    return out


def open_block_rdm(legs: int, rungs: int, first: int) -> np.ndarray:
    """Unit-trace reduced state of rungs ``first, first + 1`` of the open ladder.

    Row index bit ``l + L*j`` is the spin of leg ``l`` on rung ``first + j``,
    matching the global site ordering restricted to the block.
    """
    _check_legs(legs, periodic=False)
    if not 0 <= first <= rungs - 2:
        raise DomainError(f"block at rung {first} does not fit in {rungs} rungs")
    left = _left_env(legs, 0, first)
    right = _right_env(legs, first + 2, rungs)
    prod = _block_products(legs, first % 2)
    q = np.einsum("pbd,bc->pcd", prod, left)
    r = np.einsum("qce,de->qcd", prod, right)
    rho = q.reshape(q.shape[0], -1) @ r.reshape(r.shape[0], -1).T
    return rho / np.trace(rho)


def periodic_block_rdms(legs: int, rungs_list) -> dict[int, np.ndarray]:
    """Unit-trace reduced states of the last two rungs of periodic ladders.

    One sweep serves every even ``M`` in ``rungs_list``; the environment of
    the first ``M - 2`` rungs is extended two rungs at a time.
    """
    _check_legs(legs, periodic=True)
    wanted = sorted(set(int(m) for m in rungs_list))
    if any(m < 4 or m % 2 for m in wanted):
        raise DomainError("periodic RVB block states need even M >= 4")
    t = [transfer_superoperator(legs, p) for p in (0, 1)]
    pair = (t[0] @ t[1]).tocsr()
    dim = rung_tensors(legs, 0)[0].shape[0]
    prod = _block_products(legs, 0)
    # prod[p, b, b0] with (b, b0) flattened
    flat = prod.reshape(prod.shape[0], dim * dim)
    env = np.eye(dim * dim)
    done = 0
    out = {}
    for m in wanted:
        while done < m - 2:
            env = _advance(env, pair)
            done += 2
        # env[(b0, c0), (b, c)] after the first m - 2 rungs
        env4 = env.reshape(dim, dim, dim, dim)
        arranged = env4.transpose(2, 0, 1, 3).reshape(dim * dim, dim * dim)
        z = flat @ arranged
        # z[p, (c0, c)]; pair with prod[q, c, c0]
        other = prod.transpose(0, 2, 1).reshape(prod.shape[0], dim * dim)
        rho = z @ other.T
        out[m] = rho / np.trace(rho)
    return out
