"""Dense complex matrix kernels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The Schur
factorization itself is delegated to LAPACK through :func:`scipy.linalg.schur`;
everything layered on top of it (eigenvalue swaps, shifted and Sylvester
triangular solves) is implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from mlmatrix.errors import EigenvalueOverlap, NoConvergence, SingularShift

#: unit roundoff of IEEE double precision
UNIT_ROUNDOFF = 2.0**-53


def as_matrix(A, *, square: bool = True) -> np.ndarray:
    """Convert *A* to a finite ``complex128`` 2D array."""
    A = np.array(A, dtype=np.complex128, copy=True)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SchurFactors:
    """Complex Schur factorization ``A = U @ T @ U^*``."""

    U: np.ndarray
    T: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.T @ self.U.conj().T


def norm_estimate(A, kind: str = "frobenius", *, maxiter: int = 100) -> float:
    """Matrix norm of *A*.

    The Frobenius and 1-norms are exact.  The 2-norm is estimated by power
    iteration on ``A^* A``, starting from a fixed vector so the estimate is
    deterministic; it never exceeds the true spectral norm.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    if kind == "frobenius":
        return float(np.linalg.norm(A, "fro"))
    if kind == "one":
        return float(np.max(np.sum(np.abs(A), axis=0)))
    if kind != "two":
        raise ValueError(f"unknown norm kind: {kind!r}")

    n = A.shape[1]
    # start from the column of largest norm, mixed with a fixed dense vector
    # so that no singular direction is missed by accident
    colnorms = np.linalg.norm(A, axis=0)
    if colnorms.max() == 0.0:
        return 0.0
    x = np.zeros(n, dtype=np.complex128)
    x[np.argmax(colnorms)] = 1.0
    x += 1.0e-3 * np.exp(1j * np.arange(n)) / np.sqrt(n)
    x /= np.linalg.norm(x)

    sigma = 0.0
    for it in range(maxiter):
        y = A @ x
        w = A.conj().T @ y
        wnorm = np.linalg.norm(w)
        if wnorm == 0.0:
            break
        new = float(np.sqrt(wnorm))
        x = w / wnorm
        if it >= 20 and abs(new - sigma) <= 1.0e-12 * new:
            sigma = new
            break
        sigma = new

    # the Rayleigh quotient of the final iterate is a lower bound
    return float(max(sigma, np.linalg.norm(A @ x)))


def shifted_triangular_solve(T, z: complex, B) -> np.ndarray:
    """Solve ``(z I - T) X = B`` for upper triangular *T*."""
    T = np.asarray(T, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    n = T.shape[0]
    diag = z - np.diag(T)
    if n and np.min(np.abs(diag)) < 1.0e-14 * max(1.0, abs(z)):
        raise SingularShift(f"shift {z} coincides with an eigenvalue")

    S = -np.triu(T)
    S[np.diag_indices(n)] = diag
    return sla.solve_triangular(S, B, lower=False, check_finite=False)


def schur_decompose(A) -> SchurFactors:
    """Complex Schur decomposition of a square matrix."""
    A = as_matrix(A)
    n = A.shape[0]
    if n == 0:
        return SchurFactors(np.eye(0, dtype=np.complex128), A)
    try:
        T, U = sla.schur(A, output="complex", check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QR iteration failed: {exc}") from exc

    return SchurFactors(U=np.ascontiguousarray(U), T=np.triu(T))


def swap_adjacent(factors: SchurFactors, k: int) -> SchurFactors:
    """Exchange the diagonal entries ``k`` and ``k + 1`` (0-based) of ``T``.

    A single unitary plane rotation is applied to ``T`` from both sides and
    accumulated into ``U``.  Equal entries are left untouched.
    """
    n = factors.n
    if not 0 <= k < n - 1:
        raise IndexError(f"swap index {k} out of range for order {n}")

    T = factors.T.copy()
    U = factors.U.copy()
    a, b, c = T[k, k], T[k, k + 1], T[k + 1, k + 1]
    if abs(a - c) < 1.0e-14 * np.linalg.norm(T, "fro"):
        return SchurFactors(U=U, T=T)

    # eigenvector of the 2x2 block for the eigenvalue c
    v = np.array([b, c - a])
    v /= np.linalg.norm(v)
    Q = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])

    T[k : k + 2, :] = Q.conj().T @ T[k : k + 2, :]
    T[:, k : k + 2] = T[:, k : k + 2] @ Q
    U[:, k : k + 2] = U[:, k : k + 2] @ Q
    T[k + 1, k] = 0.0
    T[k, k], T[k + 1, k + 1] = c, a

    return SchurFactors(U=U, T=T)


def sylvester_solve_triangular(M, N, P) -> np.ndarray:
    """Solve ``X M - N X = P`` for upper triangular *M* and *N*.

    The solution is built one column at a time: column ``j`` satisfies
    ``(M[j, j] I - N) x_j = P[:, j] - X[:, :j] @ M[:j, j]``.
    """
    M = np.asarray(M, dtype=np.complex128)
    N = np.asarray(N, dtype=np.complex128)
    P = np.asarray(P, dtype=np.complex128)
    p, q = N.shape[0], M.shape[0]
    if P.shape != (p, q):
        raise ValueError(f"right-hand side has shape {P.shape}, expected {(p, q)}")

    lam = np.diag(M)
    mu = np.diag(N)
    sep = np.min(np.abs(lam[:, None] - mu[None, :])) if p and q else np.inf
    scale = max(np.linalg.norm(M, "fro"), np.linalg.norm(N, "fro"), 1.0)
    if sep <= 1.0e-8 * scale:
        raise EigenvalueOverlap(
            f"spectra are not separated: min gap {sep:.3e} (scale {scale:.3e})"
        )

    X = np.zeros((p, q), dtype=np.complex128)
    for j in range(q):
        rhs = P[:, j] - X[:, :j] @ M[:j, j]
        X[:, j] = shifted_triangular_solve(N, lam[j], rhs)

    return X
