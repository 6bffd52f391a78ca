"""Norms and block reduced density matrices of RVB ladders by recursion.

Two families live here.  The transfer-based routines (``norm_recursion``,
``block_rdm_2xL``) are exact for any leg count within their resource
limits.  The two-term routines (``three_term_norms``,
``two_term_block_rdm_open``) follow the scalar recursions built from
``|1>``, ``|2>`` and ``|2bar>``; they close only when the open two-rung
recursion is exact, i.e. for one- and two-leg ladders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConstructionError, DomainError, ResourceError
from ..hilbert import ReducedState
from ..lattice import Boundary
from . import transfer
from .coverings import singlet_product
from .states import _two_rung_open, rung_block, two_bar

GAMMA_RESIDUAL_TOL = 1e-10
MAX_TWO_TERM_SITES = 24


def norm_recursion(legs: int, max_rungs: int, boundary=Boundary.OPEN) -> dict[int, float]:
    """``N_M = <M|M>`` of the unnormalized RVB ladder for every even ``M``.

    Each step multiplies the bra-ket environment by one rung transfer, the
    linear recursion in ``M`` that underlies the scalar three-term form.
    """
    boundary = Boundary.parse(boundary)
    if max_rungs < 2:
        raise DomainError("max_rungs must be at least 2")
    if boundary is Boundary.PERIODIC:
        return transfer.periodic_norms(legs, max_rungs)
    norms = transfer.open_norms(legs, max_rungs)
    return {m: v for m, v in norms.items() if m % 2 == 0}


def rung_singlet_basis(legs: int, parity: int, tol: float = 1e-10) -> np.ndarray:
    """Independent rung singlets ``|gamma_j>`` (rows), ``|gamma_1> = |1>``.

    Candidates are singlet products over every perfect pairing of the rung's
    legs; dependent ones are dropped by Gram-Schmidt with a rank tolerance.
    """
    if legs % 2:
        return np.zeros((0, 1 << legs))
    candidates = [np.asarray(rung_block(legs, 1, parity))]
    for pairing in _pairings(list(range(legs))):
        oriented = [(a, b) if (parity + a) % 2 == 0 else (b, a) for a, b in pairing]
        candidates.append(singlet_product(oriented, legs))
    basis: list[np.ndarray] = []
    ortho: list[np.ndarray] = []
    for v in candidates:
        w = v.copy()
        for q in ortho:
            w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol * max(1.0, np.linalg.norm(v)):
            basis.append(v)
            ortho.append(w / nrm)
    return np.array(basis)


def _pairings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        # only pairs at odd separation join the two sublattices
        if (partner - first) % 2 == 0:
            continue
        for tail in _pairings(rest[:i] + rest[i + 1:]):
            yield [(first, partner)] + tail


def gamma_coefficients(legs: int, parity: int) -> np.ndarray:
    """Expand ``<1|_{m+1} |2bar>_{m,m+1}`` over the rung singlet basis of rung ``m``.

    ``parity`` is that of rung ``m``.  Solved by least squares; the fit
    residual must stay below ``GAMMA_RESIDUAL_TOL``.
    """
    bar = two_bar(legs, parity).reshape(1 << legs, 1 << legs)
    one = rung_block(legs, 1, 1 - parity)
    kappa = one @ bar
    basis = rung_singlet_basis(legs, parity)
    if basis.shape[0] == 0:
        if np.linalg.norm(kappa) > GAMMA_RESIDUAL_TOL:
            raise ConstructionError("contracted two-rung block has no singlet expansion")
        return np.zeros(0)
    coeffs, *_ = np.linalg.lstsq(basis.T, kappa, rcond=None)
    resid = np.linalg.norm(basis.T @ coeffs - kappa)
    if resid > GAMMA_RESIDUAL_TOL:
        raise ConstructionError(f"gamma expansion residual {resid:.3e} above tolerance")
    return coeffs


@dataclass
class ThreeTermNorms:
    """Scalar norm recursion ``N_M = N_1 N_{M-1} + N'_2 N_{M-2} + 2 gamma J_{M-1}``.

    ``J_M = <M| (|M-1> |1>)`` obeys ``J_M = N_1 N_{M-1} + gamma J_{M-1}``.
    """

    legs: int
    n1: float
    n2_bar: float
    gammas: dict[int, float] = field(default_factory=dict)
    norms: dict[int, float] = field(default_factory=dict)
    cross: dict[int, float] = field(default_factory=dict)


def three_term_norms(legs: int, max_rungs: int) -> ThreeTermNorms:
    """Open-ladder norms from the scalar three-term recursion (one or two legs)."""
    if legs > 2:
        raise DomainError(
            "the three-term norm recursion closes only for legs <= 2; use norm_recursion")
    one = rung_block(legs, 1, 0)
    n1 = float(one @ one)
    bar = two_bar(legs, 0)
    out = ThreeTermNorms(legs, n1, float(bar @ bar))
    for parity in (0, 1):
        g = gamma_coefficients(legs, parity)
        if g.size > 1 and np.any(np.abs(g[1:]) > GAMMA_RESIDUAL_TOL):
            raise ConstructionError("contraction leaves singlets outside span{|1>}")
        out.gammas[parity] = float(g[0]) if g.size else 0.0
    norms = {0: 1.0}
    cross = {0: 0.0}
    for k in range(1, max_rungs + 1):
        gamma = out.gammas[(k - 2) % 2] if k >= 2 else 0.0
        prev2 = norms[k - 2] if k >= 2 else 0.0
        norms[k] = n1 * norms[k - 1] + out.n2_bar * prev2 + 2.0 * gamma * cross[k - 1]
        cross[k] = n1 * norms[k - 1] + gamma * cross[k - 1]
    out.norms = {k: v for k, v in norms.items() if k >= 1}
    out.cross = cross
    return out


def block_sites(legs: int, first: int) -> tuple[int, ...]:
    return tuple(range(first * legs, (first + 2) * legs))


def block_rdm_2xL(legs: int, rungs: int, boundary=Boundary.PERIODIC,
                  first: int | None = None) -> ReducedState:
    """Unit-trace reduced state of the ``2 x L`` block on rungs ``first, first+1``.

    Defaults to the last two rungs.  Periodic ladders are translation
    invariant by two rungs, so only the default placement is offered there.
    """
    boundary = Boundary.parse(boundary)
    if rungs % 2 or rungs < 2:
        raise DomainError(f"RVB ladders need an even number of rungs, got {rungs}")
    if first is None:
        first = rungs - 2
    if boundary is Boundary.PERIODIC:
        if first != rungs - 2:
            raise DomainError("periodic block is fixed to the last two rungs")
        if rungs < 4:
            raise DomainError("periodic RVB ladders need at least 4 rungs")
        rho = transfer.periodic_block_rdms(legs, [rungs])[rungs]
    else:
        rho = transfer.open_block_rdm(legs, rungs, first)
    return ReducedState(block_sites(legs, first), rho)


def periodic_block_rdm_series(legs: int, rungs_list) -> dict[int, ReducedState]:
    """Block reduced states for several periodic lengths in one sweep."""
    rdms = transfer.periodic_block_rdms(legs, rungs_list)
    return {m: ReducedState(block_sites(legs, m - 2), rho) for m, rho in rdms.items()}


def two_term_block_rdm_open(legs: int, rungs: int) -> np.ndarray:
    """Last-two-rung reduced state of the open ladder from the two-term identity.

    With ``|M+2> = |M>|2> + |M-1>|2bar>|1>`` the block state is
    ``N_M |2><2| + N_{M-1} rhobar (x) |1><1| + (|2> <1|<chi_M| + h.c.)``,
    ``rhobar = tr_m |2bar><2bar|`` and
    ``<chi_M| = <2bar|_{m,m+1} <M-1|M>``.  Returned with unit trace.
    """
    if legs > 2:
        raise DomainError("the two-term block identity holds for legs <= 2 only")
    if rungs % 2 or rungs < 4:
        raise DomainError("needs an even number of rungs, at least 4")
    if legs * rungs > MAX_TWO_TERM_SITES:
        raise ResourceError("two-term identity is evaluated on explicit vectors")
    dim = 1 << legs
    m = rungs - 2                      # rungs of |M>
    first = rungs - 2                  # block rungs: first, first + 1
    big = _two_rung_open(legs, m, 0)
    small = _two_rung_open(legs, m - 1, 0)
    n_big = float(big @ big)
    n_small = float(small @ small)
    two = rung_block(legs, 2, first % 2)
    one_last = rung_block(legs, 1, (first + 1) % 2)
    bar = two_bar(legs, (first - 1) % 2).reshape(dim, dim)   # [rung first, rung first-1]
    rho_bar = bar @ bar.T
    # <M-1|M> leaves a vector on rung m-1 = first-1
    overlap = big.reshape(dim, -1) @ small
    chi = bar @ overlap
    cross = np.outer(two, np.kron(one_last, chi))
    rho = (n_big * np.outer(two, two)
           + n_small * np.kron(np.outer(one_last, one_last), rho_bar)
           + cross + cross.T)
    return rho / np.trace(rho)
