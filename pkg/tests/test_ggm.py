import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ladderent.errors import DomainError, ResourceError
from ladderent.ggm import (
    TIE_TOL,
    BipartitionSpec,
    Strategy,
    block_placements,
    compute_ggm,
    enumerate_bipartitions,
    ggm_from_block,
    validate_restricted_strategy,
)
from ladderent.hilbert import StateVector, product_state, reduced_density_matrix
from ladderent.lattice import build_ladder
from ladderent.rvb.states import build_rvb_enumerated
from ladderent.spectral import HamiltonianSpec, ground_state

from oracles import ggm_brute, singlet, w_state


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    return StateVector(n, rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)).normalize()


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def permute_sites(psi, n, perm):
    """Move the spin on site s to site perm[s]."""
    out = np.empty_like(psi)
    for idx in range(1 << n):
        new = 0
        for s in range(n):
            new |= ((idx >> s) & 1) << perm[s]
        out[new] = psi[idx]
    return out


def test_split_counts():
    assert [s.sites for s in enumerate_bipartitions(3)] == [(0,), (1,), (2,)]
    assert len(enumerate_bipartitions(4)) == 7
    assert len(enumerate_bipartitions(10)) == 2 ** 9 - 1


def test_full_limit():
    with pytest.raises(ResourceError):
        enumerate_bipartitions(17)


def test_restricted_needs_geometry():
    with pytest.raises(DomainError):
        enumerate_bipartitions(8, Strategy.RESTRICTED)


def test_restricted_two_by_four():
    g = build_ladder(2, 4, "periodic")
    splits = enumerate_bipartitions(8, Strategy.RESTRICTED, g)
    assert len(splits) == 15
    assert all(len(s.sites) <= 4 for s in splits)
    assert len(set(splits)) == 15


def test_canonical_form():
    assert BipartitionSpec.canonical(4, [2, 3]).sites == (0, 1)
    assert BipartitionSpec.canonical(5, [1, 2, 4]).sites == (0, 3)
    assert BipartitionSpec.canonical(4, [1]).complement == (0, 2, 3)


@pytest.mark.parametrize("spins", [[0, 1], [1, 0, 1, 1], [0, 0, 0, 1, 1, 0]])
def test_product_state_zero(spins):
    assert compute_ggm(product_state(spins)).value == 0.0


def test_singlet_half():
    assert compute_ggm(StateVector(2, singlet(2, 0, 1))).value == pytest.approx(0.5, abs=1e-15)


def test_w_state():
    assert compute_ggm(StateVector(3, w_state(3))).value == pytest.approx(1 / 3, abs=1e-14)


def test_singlet_pair_product():
    psi = np.kron(singlet(2, 0, 1), singlet(2, 0, 1))
    res = compute_ggm(StateVector(4, psi))
    assert res.value == pytest.approx(0.0, abs=1e-14)
    assert res.argmax.sites == (0, 1)


def test_requires_normalized_state():
    with pytest.raises(DomainError):
        compute_ggm(StateVector(2, np.ones(4)))


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_matches_brute_force_svd(n, seed):
    state = random_state(n, seed)
    assert compute_ggm(state).value == pytest.approx(ggm_brute(state.amplitudes, n), abs=1e-12)


@given(st.integers(2, 8), st.integers(0, 10_000), st.data())
def test_permutation_invariance(n, seed, data):
    state = random_state(n, seed)
    perm = data.draw(st.permutations(range(n)))
    moved = StateVector(n, permute_sites(state.amplitudes, n, perm))
    assert abs(compute_ggm(state).value - compute_ggm(moved).value) < 1e-10


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_local_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    state = random_state(n, seed)
    # site n-1 is the most significant bit, so it comes first in the Kronecker product
    U = kron_all([random_unitary(rng) for _ in range(n)])
    rotated = StateVector(n, U @ state.amplitudes)
    assert abs(compute_ggm(state).value - compute_ggm(rotated).value) < 1e-10


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_value_range_and_identity(n, seed):
    res = compute_ggm(random_state(n, seed))
    assert 0.0 <= res.value < 1.0
    assert res.value == 1.0 - res.lambda_sq
    assert res.lambda_sq >= 2.0 ** (-n / 2) - 1e-12
    assert res.argmax in res.ties


def test_zero_iff_product_split():
    psi = np.kron(w_state(3), singlet(2, 0, 1))
    res = compute_ggm(StateVector(5, psi))
    assert res.value == pytest.approx(0.0, abs=1e-9)
    assert res.lambda_sq >= 1 - 1e-9


def test_ties_recorded_and_ordered():
    # every single-site split of a translation-invariant ring ties
    g = build_ladder(1, 6, "periodic")
    res = compute_ggm(ground_state(HamiltonianSpec(g)).state)
    assert res.ties == sorted(res.ties, key=BipartitionSpec.sort_key)
    assert res.argmax == res.ties[0]
    assert len(res.ties) >= 6


def test_json_schema():
    res = compute_ggm(StateVector(3, w_state(3)))
    data = json.loads(res.to_json())
    assert set(data) == {"value", "lambda_sq", "argmax", "strategy", "ties"}
    assert data["argmax"] == [0]
    assert data["strategy"] == "full"


def test_placements():
    assert block_placements(build_ladder(2, 6, "periodic")) == [(4, 5)]
    assert block_placements(build_ladder(2, 6, "open")) == [(4, 5), (2, 3)]
    assert block_placements(build_ladder(2, 4, "open")) == [(2, 3), (1, 2)]


@pytest.mark.parametrize("legs,rungs,boundary", [(2, 4, "periodic"), (1, 6, "periodic"),
                                                 (2, 4, "open"), (1, 8, "open")])
def test_restricted_never_exceeds_full(legs, rungs, boundary):
    g = build_ladder(legs, rungs, boundary)
    for state in (ground_state(HamiltonianSpec(g)).state, random_state(g.n, legs * rungs)):
        full = compute_ggm(state, Strategy.FULL, g)
        restricted = compute_ggm(state, Strategy.RESTRICTED, g)
        assert restricted.lambda_sq <= full.lambda_sq + 1e-12


def test_validate_rvb_two_by_four():
    g = build_ladder(2, 4, "periodic")
    rep = validate_restricted_strategy(build_rvb_enumerated(g).state, g)
    assert rep["agree"] and abs(rep["difference"]) <= 1e-9


def test_validate_chain_ground_state():
    g = build_ladder(1, 6, "periodic")
    rep = validate_restricted_strategy(ground_state(HamiltonianSpec(g)).state, g)
    assert rep["agree"]


def test_validate_product_state():
    g = build_ladder(2, 3, "open")
    rep = validate_restricted_strategy(product_state([0, 1] * 3), g)
    assert rep["ggm_full"] == 0.0 and rep["ggm_restricted"] == 0.0 and rep["agree"]


def test_ggm_from_block_matches_state_path():
    g = build_ladder(2, 6, "periodic")
    state = build_rvb_enumerated(g).state
    block = reduced_density_matrix(state, g.rung_sites(4) + g.rung_sites(5))
    a = ggm_from_block(block, g.n)
    b = compute_ggm(state, Strategy.RESTRICTED, g)
    assert a.value == pytest.approx(b.value, abs=1e-13)
    assert a.argmax == b.argmax


def test_tie_tolerance_constant():
    assert TIE_TOL == 1e-9
