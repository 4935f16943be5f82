import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from btcgmc import dicke


def test_single_spin_jz():
    ops = dicke.build_collective_ops(1)
    assert np.allclose(ops.jz, np.diag([-0.5, 0.5]))


def test_two_spin_lowering_matches_brute_force():
    ops = dicke.build_collective_ops(2)
    assert np.allclose(np.diag(ops.jminus, 1), [np.sqrt(2), np.sqrt(2)])
    full = oracles.collective(2)
    V = oracles.isometry(2)
    assert np.allclose(V.conj().T @ full["jm"] @ V, ops.jminus, atol=1e-14)


@pytest.mark.parametrize("N", [1, 2, 3, 7, 40, 301])
def test_casimir_and_commutators(N):
    ops = dicke.build_collective_ops(N)
    S = N / 2
    cas = ops.jplus @ ops.jminus + ops.jminus @ ops.jplus + 2 * ops.jz @ ops.jz
    assert np.allclose(cas, 2 * S * (S + 1) * np.eye(N + 1), atol=1e-10 * max(1, S * S))
    comm = ops.jx @ ops.jy - ops.jy @ ops.jx
    assert np.abs(comm - 1j * ops.jz).max() < 1e-10 * max(1, N)
    assert np.allclose(ops.jplus, ops.jminus.conj().T)
    assert np.allclose(np.diag(ops.jz), np.arange(N + 1) - S)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_collective_ops_match_full_space(N):
    ops = dicke.build_collective_ops(N)
    full = oracles.collective(N)
    V = oracles.isometry(N)
    for name, mine in zip(("jx", "jy", "jz"), ops.cartesian()):
        assert np.allclose(V.conj().T @ full[name] @ V, mine, atol=1e-13)


def test_rejects_zero_spins():
    with pytest.raises(ValueError):
        dicke.build_collective_ops(0)


def test_operators_are_read_only():
    ops = dicke.build_collective_ops(3)
    with pytest.raises(ValueError):
        ops.jz[0, 0] = 1.0


def test_log_binom_out_of_range():
    assert dicke.log_binom(5, 6) == -np.inf
    assert np.isclose(np.exp(dicke.log_binom(10, 3)), 120)


def test_model_params_validation():
    with pytest.raises(ValueError):
        dicke.ModelParams(0, 1.0)
    with pytest.raises(ValueError):
        dicke.ModelParams(4, -1.0)
    with pytest.raises(ValueError):
        dicke.ModelParams(4, 1.0, 0.0)
    assert dicke.ModelParams(8, 1.0).S == 4


# --- reduce_to_k -------------------------------------------------------------

@pytest.mark.parametrize("N,k", [(5, 1), (5, 3), (9, 4)])
def test_all_down_reduces_to_all_down(N, k):
    red = dicke.reduce_to_k(dicke.dicke_state(N, 0), k)
    assert np.allclose(red, dicke.dicke_state(k, 0))


def test_two_spin_dicke_marginal():
    red = dicke.reduce_to_k(dicke.dicke_state(2, 1), 1)
    assert np.allclose(red, np.diag([0.5, 0.5]), atol=1e-15)
    # oracle route
    full = oracles.to_full(dicke.dicke_state(2, 1))
    assert np.allclose(oracles.partial_trace_keep_first(full, 2, 1), red, atol=1e-15)


@pytest.mark.parametrize("N", range(1, 7))
def test_reduce_matches_full_space_partial_trace(N):
    rng = np.random.default_rng(100 + N)
    rho = oracles.random_symmetric_state(N, rng)
    full = oracles.to_full(rho)
    for k in range(1, N + 1):
        mine = dicke.reduce_to_k(rho, k)
        ref = oracles.from_full(oracles.partial_trace_keep_first(full, N, k), k)
        assert np.abs(mine - ref).max() < 1e-12


def test_reduce_identity_at_full_size():
    rho = oracles.random_symmetric_state(5, np.random.default_rng(0))
    assert np.allclose(dicke.reduce_to_k(rho, 5), rho)


def test_reduce_rejects_bad_order():
    rho = dicke.dicke_state(4, 1)
    for k in (0, 5):
        with pytest.raises(ValueError):
            dicke.reduce_to_k(rho, k)


def test_trace_out_one_and_chain_agree_with_kernel():
    rho = oracles.random_symmetric_state(9, np.random.default_rng(7))
    chain = dicke.marginal_chain(rho)
    for k in range(1, 10):
        assert np.allclose(chain[k], dicke.reduce_to_k(rho, k), atol=1e-13)
    assert np.allclose(dicke.trace_out_one(rho), dicke.reduce_to_k(rho, 8), atol=1e-13)


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, N=st.integers(2, 14), data=st.data())
def test_reduce_is_a_channel(seed, N, data):
    rng = np.random.default_rng(seed)
    rank = data.draw(st.integers(1, N + 1))
    rho = oracles.random_symmetric_state(N, rng, rank)
    k = data.draw(st.integers(1, N))
    red = dicke.reduce_to_k(rho, k)
    assert abs(np.trace(red) - 1) < 1e-12
    assert np.abs(red - red.conj().T).max() < 1e-13
    assert np.linalg.eigvalsh(red)[0] > -1e-9
    assert dicke.von_neumann_entropy(red) <= np.log(k + 1) + 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, N=st.integers(2, 6), data=st.data())
def test_nested_marginals_compatible(seed, N, data):
    rho = oracles.random_symmetric_state(N, np.random.default_rng(seed))
    k2 = data.draw(st.integers(1, N))
    k1 = data.draw(st.integers(1, k2))
    nested = dicke.reduce_to_k(dicke.reduce_to_k(rho, k2), k1)
    direct = dicke.reduce_to_k(rho, k1)
    assert np.abs(nested - direct).max() < 1e-12
    full = oracles.to_full(rho)
    ref = oracles.from_full(oracles.partial_trace_keep_first(full, N, k1), k1)
    assert np.abs(direct - ref).max() < 1e-12


# --- spectral functionals ----------------------------------------------------

def test_entropy_examples():
    assert dicke.von_neumann_entropy(dicke.dicke_state(5, 2)) == 0.0
    assert np.isclose(dicke.von_neumann_entropy(np.diag([0.5, 0.5])), np.log(2))
    assert np.isclose(dicke.von_neumann_entropy(np.eye(8) / 8), np.log(8))


def test_entropy_rejects_non_hermitian():
    with pytest.raises(ValueError):
        dicke.von_neumann_entropy(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_entropy_invariant_under_embedding():
    rho = oracles.random_symmetric_state(5, np.random.default_rng(3))
    assert np.isclose(dicke.von_neumann_entropy(rho),
                      oracles.entropy(dicke.embed_full_space(rho)), atol=1e-12)


def test_purity_and_coherence():
    from btcgmc.dynamics import initial_state_minus_x
    assert np.isclose(dicke.purity(dicke.dicke_state(4, 1)), 1.0)
    assert dicke.l1_coherence(np.diag([0.2, 0.3, 0.5])) == 0.0
    # separable product state with coherence in the Dicke basis
    psi = initial_state_minus_x(10)
    assert dicke.l1_coherence(psi) > 1.0
    assert np.allclose(dicke.element_magnitudes(psi), np.abs(psi))


def test_embedding_examples():
    assert np.allclose(dicke.embed_full_space(dicke.dicke_state(1, 1)), np.diag([0, 1]))
    full = dicke.embed_full_space(dicke.dicke_state(2, 1))
    v = np.array([0, 1, 1, 0]) / np.sqrt(2)
    assert np.allclose(full, np.outer(v, v))
    assert np.allclose(dicke.symmetric_isometry(4), oracles.isometry(4))


def test_embedding_limit():
    with pytest.raises(ValueError):
        dicke.embed_full_space(dicke.dicke_state(13, 0))


def test_check_density_matrix_rejects_bad_states():
    with pytest.raises(ValueError):
        dicke.check_density_matrix(np.diag([0.5, 0.6]))
    bad = np.diag([1.5, -0.5])
    dicke.check_density_matrix(bad)  # positivity is opt-in
    with pytest.raises(ValueError):
        dicke.check_density_matrix(bad, pos_tol=dicke.POSITIVITY_TOL)


def test_magnetization_of_minus_x():
    from btcgmc.dynamics import initial_state_minus_x
    for N in (1, 4, 25):
        assert np.allclose(dicke.magnetization(initial_state_minus_x(N)), [-1, 0, 0], atol=1e-10)
