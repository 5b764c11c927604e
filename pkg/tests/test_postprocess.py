import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_lingam.exceptions import RescaleError
from sparse_lingam.postprocess import (
    best_diagonal_permutation,
    final_truncate,
    is_acyclic,
    postprocess,
    prune_to_dag,
    rescale_to_B,
)
from sparse_lingam.synth import assign_weights_and_noises, gen_er_graph
from helpers import brute_force_assignment, dfs_has_cycle


def _objective(M, perm):
    diag = np.abs(M[perm, np.arange(M.shape[0])])
    return np.sum(np.where(diag > 0, 1 / np.where(diag > 0, diag, 1), 1e12))


def _random_sparse(rng, d, density=0.3):
    B = rng.normal(size=(d, d)) * (rng.random((d, d)) < density)
    np.fill_diagonal(B, 0.0)
    return B


def _sequential_prune(B):
    """One-at-a-time test-and-cutoff with a DFS acyclicity test."""
    B = B.copy()
    cutoff = 0.0
    while dfs_has_cycle(B):
        r, c = np.nonzero(B)
        mags = np.abs(B[r, c])
        k = np.lexsort((c, r, mags))[0]
        cutoff = mags[k]
        B[r[k], c[k]] = 0.0
    return B, cutoff


class TestBestDiagonalPermutation:
    def test_identity(self):
        perm, degenerate = best_diagonal_permutation(np.eye(4))
        assert list(perm) == [0, 1, 2, 3] and not degenerate

    def test_antidiagonal(self):
        perm, _ = best_diagonal_permutation(np.fliplr(np.eye(3)))
        assert list(perm) == [2, 1, 0]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            d = int(rng.integers(2, 7))
            M = rng.normal(size=(d, d)) * (rng.random((d, d)) < 0.7)
            perm, _ = best_diagonal_permutation(M)
            _, best = brute_force_assignment(M)
            assert _objective(M, perm) <= best * (1 + 1e-12)

    def test_degenerate_flag(self):
        M = np.array([[1.0, 2.0], [0.0, 0.0]])
        _, degenerate = best_diagonal_permutation(M)
        assert degenerate


class TestRescale:
    def test_scaled_identity(self):
        np.testing.assert_array_equal(rescale_to_B(2 * np.eye(3), np.arange(3)), np.zeros((3, 3)))

    def test_row_arithmetic(self):
        B = rescale_to_B(np.array([[2.0, 1.0], [0.0, 1.0]]), [0, 1])
        np.testing.assert_array_equal(B[0], [0.0, -0.5])

    def test_exact_sem(self):
        B = np.array([[0, 0, 0], [0.7, 0, 0], [-0.4, 1.2, 0]])
        np.testing.assert_allclose(rescale_to_B(np.eye(3) - B, np.arange(3)), B, atol=1e-15)

    def test_zero_diagonal(self):
        with pytest.raises(RescaleError):
            rescale_to_B(np.array([[0.0, 1.0], [1.0, 1.0]]), [0, 1])

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 10))
    def test_recovers_generator_dag(self, seed, d):
        rng = np.random.default_rng(seed)
        B = assign_weights_and_noises(gen_er_graph(d, min(d, d * (d - 1) // 2), seed), seed).B
        rows = rng.permutation(d)
        scales = rng.uniform(0.2, 5.0, d) * rng.choice([-1, 1], d)
        M = ((np.eye(d) - B) * scales[:, None])[rows]
        perm, degenerate = best_diagonal_permutation(M)
        assert not degenerate
        np.testing.assert_allclose(rescale_to_B(M, perm), B, atol=1e-10)


class TestIsAcyclic:
    def test_lower_triangular(self):
        B = np.tril(np.ones((4, 4)), -1)
        assert is_acyclic(B) == (True, [0, 1, 2, 3])

    def test_two_cycle(self):
        assert not is_acyclic(np.array([[0.0, 0.3], [0.2, 0.0]]))[0]

    def test_permuted_generator_dag(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            B = assign_weights_and_noises(gen_er_graph(8, 10, seed), seed).B
            p = rng.permutation(8)
            Bp = B[np.ix_(p, p)]
            ok, order = is_acyclic(Bp)
            assert ok
            pos = np.empty(8, dtype=int)
            pos[order] = np.arange(8)
            for j, k in zip(*np.nonzero(Bp)):
                assert pos[k] < pos[j]

    def test_agrees_with_dfs(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            d = int(rng.integers(2, 9))
            B = _random_sparse(rng, d, density=rng.uniform(0.05, 0.4))
            assert is_acyclic(B)[0] == (not dfs_has_cycle(B))


class TestPrune:
    def test_already_acyclic(self):
        B = np.array([[0, 0], [0.5, 0]])
        out, cutoff = prune_to_dag(B)
        np.testing.assert_array_equal(out, B)
        assert cutoff == 0.0

    def test_two_cycle(self):
        out, cutoff = prune_to_dag(np.array([[0, 0.01], [0.9, 0]]))
        np.testing.assert_array_equal(out, [[0, 0], [0.9, 0]])
        assert cutoff == 0.01

    def test_three_cycle_with_extra_edges(self):
        B = np.zeros((4, 4))
        B[1, 0], B[2, 1], B[0, 2] = 0.1, 0.2, 0.3
        B[3, 0], B[3, 2] = 0.5, 0.8
        out, cutoff = prune_to_dag(B)
        removed = list(zip(*np.nonzero((B != 0) & (out == 0))))
        assert removed == [(1, 0)] and cutoff == 0.1
        # no smaller edge set would do: every single edge of the cycle is needed
        for j, k in [(1, 0), (2, 1), (0, 2)]:
            trial = B.copy()
            trial[j, k] = 0
            assert not dfs_has_cycle(trial)

    def test_matches_sequential_loop(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            d = int(rng.integers(2, 9))
            B = _random_sparse(rng, d, density=rng.uniform(0.1, 0.6))
            out, cutoff = prune_to_dag(B)
            ref, ref_cut = _sequential_prune(B)
            np.testing.assert_array_equal(out, ref)
            assert cutoff == ref_cut
            assert not dfs_has_cycle(out)


class TestFinalTruncate:
    def test_zero_threshold(self):
        B = np.array([[0, 0.01], [0, 0]])
        np.testing.assert_array_equal(final_truncate(B, 0.0), B)

    def test_cutoff(self):
        out = final_truncate(np.array([[0.0, 0.04], [0.06, 0.0]]), 0.05)
        np.testing.assert_array_equal(out, [[0, 0], [0.06, 0]])


class TestPostprocess:
    def test_invariants(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = int(rng.integers(2, 8))
            M = rng.normal(size=(d, d))
            est = postprocess(M)
            assert np.all(np.diag(est.B) == 0)
            assert est.acyclic
            P = est.B[np.ix_(est.causal_order, est.causal_order)]
            assert np.all(np.triu(P) == 0)
            assert np.all((est.B == 0) | (np.abs(est.B) >= 0.05))

    def test_degenerate_input_is_flagged(self):
        est = postprocess(np.array([[1.0, 2.0], [0.0, 0.0]]))
        assert est.degenerate and np.all(np.isfinite(est.B))
