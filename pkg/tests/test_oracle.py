import numpy as np
import pytest

from lpvmor import (
    HankelTooLarge,
    enumerate_sub_markov,
    extended_obs_matrix,
    extended_reach_matrix,
    hankel,
    hankel_rank,
    is_observable,
    is_reachable,
    reach_basis,
    unobs_cobasis,
)
from lpvmor.model import _frozen, random_model
from lpvmor.oracle import obs_rows, reach_cols


def test_r0_is_stacked_B(small_model):
    np.testing.assert_array_equal(
        extended_reach_matrix(small_model, 0), np.hstack(list(small_model.B))
    )


def test_o0_is_stacked_C(small_model):
    np.testing.assert_array_equal(
        extended_obs_matrix(small_model, 0), np.vstack(list(small_model.C))
    )


def test_reach_matrix_span(rng):
    m = random_model(rng, 4, 1, 1, n_p=2)
    R = extended_reach_matrix(m, 3)
    V = reach_basis(m, 3).matrix
    Rn = R / np.linalg.norm(R, axis=0)
    assert np.max(np.abs(Rn - V @ V.T @ Rn)) < 1e-9


def test_obs_matrix_kernel(rng):
    # three-state model whose last state never reaches the output
    m = random_model(rng, 3, 1, 1, n_p=1)
    A = m.A.copy()
    A[:, :2, 2] = 0
    C = m.C.copy()
    C[:, :, 2] = 0
    m = _frozen(A, m.B, C)
    O = extended_obs_matrix(m, 2)
    W = unobs_cobasis(m, 2).matrix
    assert W.shape[0] == 2
    np.testing.assert_allclose(O @ np.array([0, 0, 1.0]), 0)
    np.testing.assert_allclose(W @ np.array([0, 0, 1.0]), 0, atol=1e-15)


def test_example_refused_at_n6(example):
    assert obs_rows(1, 5, 6) == 335_922
    with pytest.raises(HankelTooLarge, match="hankel too large") as exc:
        extended_obs_matrix(example, 6)
    assert exc.value.shape == (335_922, 7)


def test_cap_env_override(monkeypatch, small_model):
    monkeypatch.setenv("LPVMOR_HANKEL_CAP", "10")
    with pytest.raises(HankelTooLarge):
        extended_reach_matrix(small_model, 1)


def test_zero_model_hankel():
    m = _frozen(np.zeros((2, 3, 3)), np.zeros((2, 3, 1)), np.zeros((2, 1, 3)))
    art = hankel(m, 2)
    assert not art.H.any()
    assert hankel_rank(m, 2) == 0


def test_minimal_model_rank(rng):
    m = random_model(rng, 3, 1, 1, n_p=1)
    assert is_reachable(m) and is_observable(m)
    assert hankel_rank(m, m.n_x - 1) == 3


def test_hankel_blocks_are_sub_markov(rng):
    m = random_model(rng, 3, 2, 2, n_p=2)
    N = 2
    art = hankel(m, N)
    etas = {(i.q, i.q0, i.word): M for i, M in enumerate_sub_markov(m, 2 * N)}
    k = m.n_p + 1
    n_blocks = k * sum(k**j for j in range(N + 1))
    assert art.H.shape == (m.n_y * n_blocks, m.n_u * n_blocks)
    for rb in range(n_blocks):
        for cb in range(n_blocks):
            idx = art.block_index(rb, cb)
            np.testing.assert_allclose(art.block(rb, cb), etas[(idx.q, idx.q0, idx.word)],
                                       rtol=1e-12, atol=1e-14)


def test_hankel_equals_product(small_model):
    art = hankel(small_model, 1)
    np.testing.assert_array_equal(art.H, art.O @ art.R)


@pytest.mark.parametrize("n_p", range(1, 6))
@pytest.mark.parametrize("N", range(0, 7))
def test_closed_form_dimensions(n_p, N):
    words = sum((n_p + 1) ** k for k in range(N + 1))
    assert reach_cols(2, n_p, N) == 2 * (n_p + 1) * words
    assert obs_rows(3, n_p, N) == 3 * (n_p + 1) * ((n_p + 1) ** (N + 1) - 1) // n_p


@pytest.mark.parametrize("seed", range(8))
def test_rank_bounded_by_subspaces(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, 5, 1, 1, n_p=1)
    m = _frozen(m.A * (rng.random(m.A.shape) < 0.4), m.B, m.C)
    for N in range(4):
        h = hankel_rank(m, N)
        assert h <= min(reach_basis(m, N).r, unobs_cobasis(m, N).r)
