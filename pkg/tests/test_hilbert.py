from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ladderent.errors import DomainError, ResourceError
from ladderent.hilbert import (
    StateVector,
    amplitude_matrix,
    basis_index,
    fixed_down_basis,
    max_schmidt_sq,
    partial_trace,
    product_state,
    reduced_density_matrix,
    sz_zero_basis,
)

from oracles import rdm_loops, singlet, w_state


def random_state(n, seed, complex_=True):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(1 << n)
    if complex_:
        psi = psi + 1j * rng.standard_normal(1 << n)
    return StateVector(n, psi).normalize()


def test_sz_zero_basis_small():
    assert list(sz_zero_basis(2)) == [0b01, 0b10]
    assert len(sz_zero_basis(4)) == 6
    assert len(sz_zero_basis(8)) == 70


def test_sz_zero_basis_odd():
    with pytest.raises(DomainError):
        sz_zero_basis(5)


@pytest.mark.parametrize("n", [6, 10, 24])
def test_sz_zero_basis_sorted_and_complete(n):
    basis = sz_zero_basis(n)
    assert len(basis) == comb(n, n // 2)
    assert np.all(np.diff(basis) > 0)
    if n <= 10:
        brute = [s for s in range(1 << n) if bin(s).count("1") == n // 2]
        assert list(basis) == brute


@given(st.integers(2, 14), st.data())
def test_basis_index_inverts_basis(n, data):
    k = data.draw(st.integers(0, n))
    basis = fixed_down_basis(n, k)
    idx = basis_index(n, k)
    assert np.array_equal(idx.lookup(basis), np.arange(len(basis)))


def test_singlet_rdm():
    rho = reduced_density_matrix(StateVector(2, singlet(2, 0, 1)), [0])
    assert np.allclose(rho.matrix, np.eye(2) / 2, atol=1e-15)
    rho.check()


def test_product_rdm():
    rho = reduced_density_matrix(product_state([0, 0]), [0])
    assert np.allclose(rho.matrix, np.diag([1, 0]))


def test_chain_rdm_matches_loops():
    # exact ground state of the open 4-chain, from an independent dense matrix
    from oracles import heisenberg_matrix, ladder_bonds
    H = heisenberg_matrix(4, ladder_bonds(1, 4, False))
    psi = np.linalg.eigh(H)[1][:, 0]
    rho = reduced_density_matrix(StateVector(4, psi), [0, 1])
    ref = rdm_loops(psi, 4, [0, 1])
    assert np.allclose(rho.matrix, ref, atol=1e-13)
    assert np.allclose(rho.eigenvalues(), np.linalg.eigvalsh(ref), atol=1e-13)


def test_max_schmidt_examples():
    assert max_schmidt_sq(StateVector(2, singlet(2, 0, 1)), [0]) == pytest.approx(0.5, abs=1e-15)
    up_down_up = product_state([0, 1, 0])
    for k in ([0], [1], [2], [0, 2]):
        assert max_schmidt_sq(up_down_up, k) == pytest.approx(1.0, abs=1e-15)
    assert max_schmidt_sq(StateVector(3, w_state(3)), [0]) == pytest.approx(2 / 3, abs=1e-14)


@pytest.mark.parametrize("sites", [[], [0, 0], [5], [0, 1, 2, 3]])
def test_bad_subsets(sites):
    with pytest.raises(DomainError):
        reduced_density_matrix(random_state(4, 0), sites)


def test_rdm_size_limit():
    psi = StateVector(16, np.ones(1 << 16)).normalize()
    with pytest.raises(ResourceError):
        reduced_density_matrix(psi, list(range(15)))


@given(st.integers(2, 10), st.integers(0, 10_000), st.data())
def test_purity_symmetry(n, seed, data):
    state = random_state(n, seed)
    k = data.draw(st.integers(1, n // 2))
    sites = data.draw(st.permutations(range(n)))[:k]
    rest = [s for s in range(n) if s not in sites]
    lam_k = reduced_density_matrix(state, sites).eigenvalues()[-1]
    lam_r = reduced_density_matrix(state, rest).eigenvalues()[-1]
    assert abs(lam_k - lam_r) < 1e-10


@given(st.integers(2, 9), st.integers(0, 10_000), st.data())
def test_rdm_invariants(n, seed, data):
    state = random_state(n, seed)
    k = data.draw(st.integers(1, n - 1))
    sites = sorted(data.draw(st.permutations(range(n)))[:k])
    rho = reduced_density_matrix(state, sites)
    rho.check()
    assert abs(np.sum(rho.eigenvalues()) - 1) < 1e-10
    assert np.allclose(rho.matrix, rdm_loops(state.amplitudes, n, sites), atol=1e-12)


@given(st.integers(3, 8), st.integers(0, 10_000), st.data())
def test_rdm_order_independence(n, seed, data):
    state = random_state(n, seed)
    k = data.draw(st.integers(2, n - 1))
    sites = data.draw(st.permutations(range(n)))[:k]
    a = reduced_density_matrix(state, sites).eigenvalues()
    b = reduced_density_matrix(state, sorted(sites)).eigenvalues()
    assert np.allclose(a, b, atol=1e-12)


@given(st.integers(3, 8), st.integers(0, 10_000), st.data())
def test_partial_trace_composes(n, seed, data):
    state = random_state(n, seed)
    block = sorted(data.draw(st.permutations(range(n)))[: n - 1])
    keep = block[: data.draw(st.integers(1, len(block) - 1))]
    rho_block = reduced_density_matrix(state, block).matrix
    direct = reduced_density_matrix(state, keep).matrix
    assert np.allclose(partial_trace(rho_block, block, keep), direct, atol=1e-12)


def test_amplitude_matrix_shape():
    m = amplitude_matrix(random_state(5, 1).amplitudes, 5, [1, 3])
    assert m.shape == (4, 8)


def test_state_validation():
    with pytest.raises(DomainError):
        StateVector(3, np.ones(7))
    with pytest.raises(DomainError):
        StateVector(2, np.zeros(4)).normalize()
    s = StateVector(2, np.ones(4))
    assert not s.normalized and s.normalize().normalized
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2.0


def test_sector_round_trip():
    state = random_state(6, 3)
    sector = StateVector(6, state.dense()[sz_zero_basis(6)], 3).normalize()
    back = StateVector(6, sector.dense()).to_sector(3)
    assert np.array_equal(back.amplitudes, sector.amplitudes)
    with pytest.raises(DomainError):
        state.to_sector(3)


@given(st.integers(1, 8), st.integers(0, 1000), st.booleans())
def test_binary_round_trip(n, seed, sector):
    state = random_state(n, seed)
    if sector and n % 2 == 0:
        state = StateVector(n, state.dense()[sz_zero_basis(n)], n // 2)
    back = StateVector.from_bytes(state.to_bytes())
    assert back.n == state.n and back.n_down == state.n_down
    assert back.normalized == state.normalized
    assert np.array_equal(back.amplitudes, state.amplitudes)


def test_binary_header_is_little_endian():
    data = StateVector(2, singlet(2, 0, 1), normalized=True).to_bytes()
    assert data[:4] == b"LSV1"
    assert int.from_bytes(data[4:8], "little") == 2
    assert np.frombuffer(data[-8:], "<f8")[0] == 0.0


def test_json_round_trip_and_limit():
    state = random_state(4, 7)
    back = StateVector.from_json(state.to_json())
    assert np.array_equal(back.amplitudes, state.amplitudes)
    with pytest.raises(ResourceError):
        StateVector(13, np.ones(1 << 13)).to_json()


def test_vdot_across_representations():
    state = random_state(4, 11, complex_=False)
    sector = StateVector(4, state.dense()[sz_zero_basis(4)], 2)
    assert sector.vdot(state) == pytest.approx(np.sum(sector.amplitudes ** 2))
