from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg as sla

from conftest import random_complex, random_triangular
from mlmatrix.errors import ConfluentBlock, EigenvalueOverlap
from mlmatrix.linalg import SchurFactors
from mlmatrix.params import MLParams
from mlmatrix.parlett import (
    BlockedSchur,
    block2x2_ml,
    blocked_schur,
    cluster_eigenvalues,
    parlett_fill,
)
from mlmatrix.testgen import gen_redheffer


def groups(labels):
    out = {}
    for i, c in enumerate(labels):
        out.setdefault(c, set()).add(i)
    return sorted(out.values(), key=min)


def min_cross_gap(blocked):
    d = np.diag(blocked.factors.T)
    gaps = [
        abs(d[i] - d[j])
        for i in range(len(d))
        for j in range(len(d))
        if blocked.cluster_of[i] != blocked.cluster_of[j]
    ]
    return min(gaps) if gaps else np.inf


class TestClustering:
    def test_pair_and_single(self):
        assert groups(cluster_eigenvalues([0, 0.05, 1], 0.1)) == [{0, 1}, {2}]

    def test_chain(self):
        assert groups(cluster_eigenvalues([0, 0.09, 0.18], 0.1)) == [{0, 1, 2}]

    def test_all_separate(self):
        labels = cluster_eigenvalues([0, 1, 2j, -3], 0.1)
        assert len(set(labels)) == 4

    def test_order_independent_partition(self, rng):
        eigs = rng.uniform(0, 2, 30) + 1j * rng.uniform(0, 0.5, 30)
        perm = rng.permutation(30)
        a = groups(cluster_eigenvalues(eigs, 0.1))
        b = groups(cluster_eigenvalues(eigs[perm], 0.1))
        mapped = sorted(({int(perm[i]) for i in g} for g in b), key=min)
        assert a == mapped

    def test_separation_property(self, rng):
        eigs = rng.uniform(-1, 1, 40) + 1j * rng.uniform(-1, 1, 40)
        labels = cluster_eigenvalues(eigs, 0.1)
        for i in range(40):
            for j in range(40):
                if labels[i] != labels[j]:
                    assert abs(eigs[i] - eigs[j]) > 0.1

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            cluster_eigenvalues([0], 0.0)


class TestBlockedSchur:
    def test_diagonal_singletons(self):
        b = blocked_schur(np.diag([1.0, 3.0, -2.0, 5j]))
        assert b.q == 4 and b.block_sizes() == [1, 1, 1, 1]

    def test_single_block(self):
        b = blocked_schur(np.diag([0.0, 0.08, 0.16, 0.05]) + np.triu(np.ones((4, 4)), 1))
        assert b.q == 1 and b.block_sizes() == [4]

    def test_redheffer_large_block(self):
        b = blocked_schur(gen_redheffer(20))
        sizes = b.block_sizes()
        assert max(sizes) > 1
        big = int(np.argmax(sizes))
        eigs = np.diag(b.factors.T)[b.block_slice(big)]
        assert np.all(np.abs(eigs - 1.0) < 0.1)

    @pytest.mark.parametrize("seed", range(8))
    def test_invariants(self, seed):
        rng = np.random.default_rng(seed)
        n = 25
        centers = rng.uniform(-3, 3, 5) + 1j * rng.uniform(-3, 3, 5)
        eigs = centers[rng.integers(0, 5, n)] + 0.02 * random_complex(rng, n)
        Q, _ = np.linalg.qr(random_complex(rng, (n, n)))
        A = Q @ (np.diag(eigs) + np.triu(random_complex(rng, (n, n), 0.3), 1)) @ Q.conj().T
        b = blocked_schur(A, 0.1)
        T = b.factors.T
        assert np.all(np.tril(T, -1) == 0)
        assert np.linalg.norm(b.factors.reconstruct() - A) <= 1e-12 * np.linalg.norm(A)
        assert min_cross_gap(b) > 0.1
        assert sum(b.block_sizes()) == n
        # contiguity: labels are non-decreasing block ids
        assert np.all(np.diff(b.cluster_of) >= 0)
        for i in range(b.q):
            assert np.all(b.cluster_of[b.block_slice(i)] == i)

    def test_interleaved_clusters_reordered(self):
        T = np.triu(np.ones((6, 6)), 1) + np.diag([0, 5, 0.01, 5.02, 0.02, 5.01])
        b = blocked_schur(T)
        d = np.diag(b.factors.T)
        assert b.block_sizes() == [3, 3]
        assert np.all(np.abs(d[:3]) < 0.1) and np.all(np.abs(d[3:] - 5) < 0.1)
        assert np.linalg.norm(b.factors.reconstruct() - T) <= 1e-13 * np.linalg.norm(T)

    def test_empty(self):
        assert blocked_schur(np.zeros((0, 0))).q == 0


def blocked_from_triangular(T, starts):
    n = T.shape[0]
    labels = np.repeat(np.arange(len(starts) - 1), np.diff(starts))
    return BlockedSchur(SchurFactors(np.eye(n, dtype=complex), np.asarray(T, dtype=complex)), labels, tuple(starts))


class TestParlettFill:
    def test_single_block_unchanged(self, rng):
        T = random_triangular(rng, 4)
        F0 = random_triangular(rng, 4)
        F = parlett_fill(blocked_from_triangular(T, [0, 4]), [F0])
        np.testing.assert_array_equal(F, F0)

    def test_exp_2x2(self):
        T = np.array([[1.0, 1.0], [0.0, 2.0]])
        b = blocked_from_triangular(T, [0, 1, 2])
        F = parlett_fill(b, [np.array([[math.e]]), np.array([[math.e**2]])])
        assert F[0, 1] == pytest.approx(4.670774270471604, rel=1e-15)
        assert F[1, 0] == 0

    def test_commutation_random(self, rng):
        for _ in range(5):
            n = 10
            T = random_triangular(rng, n, upper_scale=0.5)
            T[np.diag_indices(n)] = np.arange(n) * 0.7 + 0.1j * rng.standard_normal(n)
            starts = [0, 2, 3, 6, 7, 10]
            b = blocked_from_triangular(T, starts)
            # diagonal blocks from an exact reference make F = exp(T)
            E = sla.expm(T)
            blocks = [E[s:e, s:e] for s, e in zip(starts[:-1], starts[1:])]
            F = parlett_fill(b, blocks)
            assert np.linalg.norm(F @ T - T @ F) <= 1e-11 * np.linalg.norm(F) * np.linalg.norm(T)
            assert np.linalg.norm(F - E) <= 1e-12 * np.linalg.norm(E)

    def test_output_triangular_and_blocks_bitwise(self, rng):
        T = random_triangular(rng, 6)
        T[np.diag_indices(6)] = [0, 0.01, 1, 2, 2.03, 3]
        starts = [0, 2, 3, 5, 6]
        blocks = [random_triangular(rng, e - s) for s, e in zip(starts[:-1], starts[1:])]
        F = parlett_fill(blocked_from_triangular(T, starts), blocks)
        assert np.all(np.tril(F, -1) == 0)
        for blk, s, e in zip(blocks, starts[:-1], starts[1:]):
            np.testing.assert_array_equal(F[s:e, s:e], blk)

    def test_wrong_block_count(self, rng):
        with pytest.raises(ValueError):
            parlett_fill(blocked_from_triangular(np.eye(2), [0, 1, 2]), [np.eye(1)])

    def test_overlap(self):
        T = np.array([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(EigenvalueOverlap):
            parlett_fill(blocked_from_triangular(T, [0, 1, 2]), [np.eye(1), np.eye(1)])


class TestBlock2x2:
    def test_exp(self):
        F = block2x2_ml(1, 1, 2, MLParams(1, 1))
        assert F[0, 1] == pytest.approx(math.e**2 - math.e, rel=1e-14)
        assert F[1, 0] == 0

    def test_diagonal(self):
        F = block2x2_ml(0.5, 0, -1.0, MLParams(1, 1))
        np.testing.assert_allclose(F, np.diag([np.exp(0.5), np.exp(-1.0)]), rtol=1e-15)

    def test_confluent(self):
        with pytest.raises(ConfluentBlock):
            block2x2_ml(1.0, 1.0, 1.0, MLParams(1, 1))
