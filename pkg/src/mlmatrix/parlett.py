"""Blocked Schur form with reordering and the block Parlett recurrence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mlmatrix.errors import ConfluentBlock
from mlmatrix.linalg import (
    SchurFactors,
    as_matrix,
    schur_decompose,
    swap_adjacent,
    sylvester_solve_triangular,
)
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_scalar

DEFAULT_DELTA_SEP = 0.1


@dataclass(frozen=True)
class BlockedSchur:
    """Reordered Schur factors whose diagonal clusters are contiguous.

    ``cluster_of[k]`` is the block index of diagonal position ``k`` and
    ``block_starts`` holds the first index of each block followed by ``n``.
    """

    factors: SchurFactors
    cluster_of: np.ndarray
    block_starts: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.block_starts) - 1

    @property
    def n(self) -> int:
        return self.factors.n

    def block_slice(self, i: int) -> slice:
        return slice(self.block_starts[i], self.block_starts[i + 1])

    def block_sizes(self) -> list[int]:
        return list(np.diff(self.block_starts))


def cluster_eigenvalues(eigs, delta_sep: float = DEFAULT_DELTA_SEP) -> np.ndarray:
    """Cluster ids from the transitive closure of ``|l_i - l_j| <= delta_sep``.

    Ids are numbered in order of first appearance.
    """
    if not delta_sep > 0:
        raise ValueError("delta_sep must be positive")
    eigs = np.asarray(eigs, dtype=np.complex128).ravel()
    n = eigs.size
    labels = np.full(n, -1, dtype=int)
    close = np.abs(eigs[:, None] - eigs[None, :]) <= delta_sep
    next_id = 0
    for seed in range(n):
        if labels[seed] >= 0:
            continue
        labels[seed] = next_id
        stack = [seed]
        while stack:
            i = stack.pop()
            for j in np.nonzero(close[i] & (labels < 0))[0]:
                labels[j] = next_id
                stack.append(j)
        next_id += 1
    return labels


def blocked_schur(A, delta_sep: float = DEFAULT_DELTA_SEP) -> BlockedSchur:
    """Schur decomposition reordered so that eigenvalue clusters are contiguous.

    Clusters are ordered by the mean of their diagonal positions in the
    unordered form, then moved into place by adjacent swaps (a bubble sort on
    the cluster rank, which never swaps two members of the same cluster).
    """
    factors = schur_decompose(as_matrix(A))
    n = factors.n
    if n == 0:
        return BlockedSchur(factors, np.zeros(0, dtype=int), (0,))

    labels = cluster_eigenvalues(np.diag(factors.T), delta_sep)
    nclusters = labels.max() + 1
    positions = np.arange(n)
    mean_pos = np.array([positions[labels == c].mean() for c in range(nclusters)])
    rank = np.empty(nclusters, dtype=int)
    rank[np.argsort(mean_pos, kind="stable")] = np.arange(nclusters)

    key = rank[labels]
    for end in range(n - 1, 0, -1):
        swapped = False
        for k in range(end):
            if key[k] > key[k + 1]:
                factors = swap_adjacent(factors, k)
                key[k], key[k + 1] = key[k + 1], key[k]
                swapped = True
        if not swapped:
            break

    starts = [0] + [k for k in range(1, n) if key[k] != key[k - 1]] + [n]
    return BlockedSchur(factors, key.copy(), tuple(starts))


def parlett_fill(blocked: BlockedSchur, diag_blocks) -> np.ndarray:
    """Assemble ``F = f(T)`` from the diagonal blocks ``f(T_ii)``.

    Off-diagonal blocks are computed one block superdiagonal at a time from
    ``F_ij T_jj - T_ii F_ij = T_ij F_jj - F_ii T_ij + sum_k (T_ik F_kj - F_ik T_kj)``.
    """
    T = blocked.factors.T
    n, q = blocked.n, blocked.q
    if len(diag_blocks) != q:
        raise ValueError(f"expected {q} diagonal blocks, got {len(diag_blocks)}")

    F = np.zeros((n, n), dtype=np.complex128)
    sl = [blocked.block_slice(i) for i in range(q)]
    for i, block in enumerate(diag_blocks):
        F[sl[i], sl[i]] = block

    for s in range(1, q):
        for i in range(q - s):
            j = i + s
            Si, Sj = sl[i], sl[j]
            P = T[Si, Sj] @ F[Sj, Sj] - F[Si, Si] @ T[Si, Sj]
            for k in range(i + 1, j):
                Sk = sl[k]
                P += T[Si, Sk] @ F[Sk, Sj] - F[Si, Sk] @ T[Sk, Sj]
            F[Si, Sj] = sylvester_solve_triangular(T[Sj, Sj], T[Si, Si], P)

    return F


def block2x2_ml(t11: complex, t12: complex, t22: complex, params: MLParams) -> np.ndarray:
    """``E_{alpha,beta}`` of ``[[t11, t12], [0, t22]]`` via the divided difference."""
    gap = t22 - t11
    if abs(gap) <= 1.0e-8 * max(1.0, abs(t11), abs(t22)):
        raise ConfluentBlock(f"diagonal entries {t11} and {t22} are too close")
    f11 = ml_scalar(t11, params).value
    f22 = ml_scalar(t22, params).value
    return np.array([[f11, t12 * (f22 - f11) / gap], [0.0, f22]], dtype=np.complex128)
