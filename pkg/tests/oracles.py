"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical code: Hamiltonians are built
element by element from the bond list, reduced states by explicit index
loops, coverings by brute force over bond subsets.
"""

from itertools import combinations

import numpy as np


def ladder_bonds(legs, rungs, periodic):
    bonds = set()
    for r in range(rungs):
        for l in range(legs):
            s = r * legs + l
            if l + 1 < legs:
                bonds.add((s, s + 1))
            if r + 1 < rungs:
                bonds.add((s, s + legs))
    if periodic:
        for l in range(legs):
            bonds.add((l, (rungs - 1) * legs + l))
    return sorted(bonds)


def heisenberg_matrix(n, bonds, J=1.0, delta=1.0):
    """Dense (J/4) sum (sx sx + sy sy + delta sz sz), one matrix element at a time."""
    dim = 1 << n
    H = np.zeros((dim, dim))
    for state in range(dim):
        for i, j in bonds:
            bi = (state >> i) & 1
            bj = (state >> j) & 1
            if bi == bj:
                H[state, state] += J * delta / 4
            else:
                H[state, state] -= J * delta / 4
                H[state ^ (1 << i) ^ (1 << j), state] += J / 2
    return H


def rdm_loops(psi, n, keep):
    """Reduced density matrix by summing over the traced-out bits."""
    keep = list(keep)
    rest = [s for s in range(n) if s not in keep]
    dk = 1 << len(keep)
    rho = np.zeros((dk, dk), dtype=complex)
    psi = np.asarray(psi, dtype=complex)

    def index(kbits, rbits):
        idx = 0
        for t, s in enumerate(keep):
            idx |= ((kbits >> t) & 1) << s
        for t, s in enumerate(rest):
            idx |= ((rbits >> t) & 1) << s
        return idx

    for r in range(1 << len(rest)):
        col = np.array([psi[index(k, r)] for k in range(dk)])
        rho += np.outer(col, col.conj())
    return rho


def ggm_brute(psi, n):
    """1 - max squared Schmidt coefficient, from SVDs over every split."""
    psi = np.asarray(psi, dtype=complex).reshape([2] * n)
    best = 0.0
    for size in range(1, n // 2 + 1):
        for part in combinations(range(n), size):
            # axis a of the reshaped array is bit n-1-a of the index
            axes = [n - 1 - s for s in part]
            others = [a for a in range(n) if a not in axes]
            mat = np.transpose(psi, axes + others).reshape(1 << size, -1)
            best = max(best, np.linalg.svd(mat, compute_uv=False)[0] ** 2)
    return 1.0 - best


def count_perfect_matchings(n, bonds):
    """Perfect matchings by brute recursion on the lowest free vertex."""
    adj = {v: set() for v in range(n)}
    for i, j in bonds:
        adj[i].add(j)
        adj[j].add(i)

    def rec(free):
        if not free:
            return 1
        v = min(free)
        return sum(rec(free - {v, u}) for u in adj[v] if u in free)

    return rec(frozenset(range(n)))


def singlet(n, a, b):
    """(|up_a down_b> - |down_a up_b>)/sqrt(2) on sites a, b of an n-site register, others up."""
    psi = np.zeros(1 << n)
    psi[1 << b] = 1 / np.sqrt(2)
    psi[1 << a] = -1 / np.sqrt(2)
    return psi


def w_state(n):
    psi = np.zeros(1 << n)
    for s in range(n):
        psi[1 << s] = 1 / np.sqrt(n)
    return psi


def total_s2(psi, n):
    """<S^2> from the explicit Pauli-sum Hamiltonian of the complete graph."""
    bonds = [(i, j) for i in range(n) for j in range(i + 1, n)]
    # S^2 = 3n/4 + 2 sum_{i<j} S_i.S_j, and S_i.S_j = (1/4) sigma_i.sigma_j
    H = heisenberg_matrix(n, bonds)
    psi = np.asarray(psi)
    return 0.75 * n + 2 * float(np.real(np.vdot(psi, H @ psi)))


def lowest_eigenvalue(H, n):
    """Global minimum of the spectrum, diagonalizing each magnetization block."""
    counts = np.array([bin(s).count("1") for s in range(1 << n)])
    return min(np.linalg.eigvalsh(H[np.ix_(idx, idx)])[0]
               for idx in (np.flatnonzero(counts == k) for k in range(n + 1)))
