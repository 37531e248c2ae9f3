"""Deterministic test matrices and reference values."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.special import gammaln

from mlmatrix.errors import SeriesNotDecayed
from mlmatrix.linalg import as_matrix
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_eval

SERIES_DECAY = 1.0e-20


@dataclass(frozen=True)
class SpectrumSpec:
    eigenvalues: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.eigenvalues) != len(self.multiplicities):
            raise ValueError("eigenvalues and multiplicities differ in length")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")

    @property
    def order(self) -> int:
        return sum(self.multiplicities)

    def diagonal(self) -> np.ndarray:
        return np.repeat(np.asarray(self.eigenvalues, dtype=np.complex128), self.multiplicities)


def gen_redheffer(n: int) -> np.ndarray:
    """Redheffer matrix: ``a_ij = 1`` if ``j = 1`` or ``i`` divides ``j`` (1-based)."""
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, n + 1)[None, :]
    return ((j % i == 0) | (j == 1)).astype(np.complex128)


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Seeded real orthogonal matrix from the QR factorization of a Gaussian matrix."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def prescribed_spectrum_factors(spec: SpectrumSpec) -> tuple[np.ndarray, np.ndarray]:
    return random_orthogonal(spec.order, spec.seed), spec.diagonal()


def gen_prescribed_spectrum(spec: SpectrumSpec) -> np.ndarray:
    """``Q diag(eigenvalues) Q^T`` with a seeded real orthogonal ``Q``."""
    Q, d = prescribed_spectrum_factors(spec)
    return (Q * d) @ Q.T


def diagonalization_oracle(spec: SpectrumSpec, params: MLParams) -> np.ndarray:
    """Exact reference ``Q diag(E(lambda_i)) Q^T`` for a prescribed-spectrum matrix."""
    Q, d = prescribed_spectrum_factors(spec)
    return (Q * ml_eval(d, params)) @ Q.T


def _parse_complex(value) -> complex:
    return complex(value.replace(" ", "")) if isinstance(value, str) else complex(value)


def load_table1() -> dict[str, list[tuple[complex, int]]]:
    """The four prescribed spectra, keyed ``A1`` to ``A4``."""
    text = resources.files("mlmatrix").joinpath("data/table1.json").read_text("utf-8")
    raw = json.loads(text)["matrices"]
    return {
        name: [(_parse_complex(ev), int(m)) for ev, m in rows] for name, rows in raw.items()
    }


def table1_specs(seed: int = 0) -> dict[str, SpectrumSpec]:
    specs = {}
    for k, (name, rows) in enumerate(sorted(load_table1().items())):
        eigs, mults = zip(*rows)
        specs[name] = SpectrumSpec(tuple(eigs), tuple(mults), seed + k)
    return specs


JORDAN_EIGENVALUES = (-1.0, -0.5, 0.25, 0.9, 0.5j, -0.6 + 0.6j, 0.7 - 0.3j, -0.2 - 0.9j)


def jordan_block(lam: complex, n: int) -> np.ndarray:
    return np.diag(np.full(n, lam, dtype=np.complex128)) + np.diag(np.ones(n - 1), 1)


def gen_atomic_suite(seed: int = 0, n: int = 40) -> list[np.ndarray]:
    """Eight Jordan blocks followed by eight random clustered triangular blocks."""
    suite = [jordan_block(lam, n) for lam in JORDAN_EIGENVALUES]
    rng = np.random.default_rng(seed)
    for _ in range(8):
        center = 0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        radius = 0.1 * np.sqrt(rng.uniform(size=n))
        diag = center + radius * np.exp(2j * np.pi * rng.uniform(size=n))
        T = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1).astype(np.complex128)
        T[np.diag_indices(n)] = diag
        suite.append(T)
    return suite


# {{{ gallery-like test matrices

def _lehmer(n):
    i = np.arange(1, n + 1)
    return np.minimum.outer(i, i) / np.maximum.outer(i, i)


def _minij(n):
    i = np.arange(1, n + 1)
    return np.minimum.outer(i, i).astype(float)


def _kms(n, rho=0.5):
    i = np.arange(n)
    return rho ** np.abs(np.subtract.outer(i, i))


def _tridiag(n):
    return 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


def _grcar(n, k=3):
    A = -np.eye(n, k=-1) + np.eye(n)
    for j in range(1, k + 1):
        A += np.eye(n, k=j)
    return A


def _parter(n):
    i = np.arange(1, n + 1)
    return 1.0 / (np.subtract.outer(i, i) + 0.5)


def _pei(n, a=1.0):
    return a * np.eye(n) + np.ones((n, n))


def _clement(n):
    k = np.arange(1, n)
    return np.diag(np.sqrt(k * (n - k)), 1) + np.diag(np.sqrt(k * (n - k)), -1)


def _lesp(n):
    return np.diag(-(2.0 * np.arange(1, n + 1) + 3.0)) + np.diag(np.ones(n - 1), 1) + np.diag(
        1.0 / np.arange(2, n + 1), -1
    )


def _fiedler(n):
    i = np.arange(1, n + 1)
    return np.abs(np.subtract.outer(i, i)).astype(float)


def _ris(n):
    i = np.arange(1, n + 1)
    return 0.5 / (n - np.add.outer(i, i) + 1.5)


def _riemann(n):
    # B(i, j) = i - 1 if i divides j, else -1, for i, j = 2, ..., n + 1
    i = np.arange(2, n + 2)[:, None]
    j = np.arange(2, n + 2)[None, :]
    return np.where(j % i == 0, i - 1, -1).astype(float)


def _chebspec(n):
    # Chebyshev spectral differentiation matrix on n points, first row/col removed
    m = n
    x = np.cos(np.pi * np.arange(m + 1) / m)
    c = np.ones(m + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(m + 1)
    X = np.subtract.outer(x, x) + np.eye(m + 1)
    D = np.outer(c, 1.0 / c) / X
    D -= np.diag(D.sum(axis=1))
    return D[1:, 1:]


def _smoke(n):
    w = np.exp(2j * np.pi / n)
    return np.diag(w ** np.arange(1, n + 1)) + np.eye(n, k=1) + np.eye(n, k=-(n - 1))


def _jordbloc(n, lam=-1.0):
    return jordan_block(lam, n).real


GALLERY = {
    "lehmer": _lehmer,
    "minij": _minij,
    "kms": _kms,
    "tridiag": _tridiag,
    "grcar": _grcar,
    "parter": _parter,
    "pei": _pei,
    "clement": _clement,
    "lesp": _lesp,
    "fiedler": _fiedler,
    "ris": _ris,
    "riemann": _riemann,
    "chebspec": _chebspec,
    "smoke": _smoke,
    "jordbloc": _jordbloc,
}

GALLERY_NORM = 8.0


def gen_gallery_like(n: int = 30, scale: float = GALLERY_NORM) -> dict[str, np.ndarray]:
    """Fifteen classical test matrices, each rescaled to two-norm *scale*."""
    out = {}
    for name, make in GALLERY.items():
        A = np.asarray(make(n), dtype=np.complex128)
        out[name] = A * (scale / np.linalg.norm(A, 2))
    return out


# }}}


def oracle_series(A, params: MLParams, terms: int = 200, *, return_abs_sum: bool = False):
    """Compensated direct summation of ``sum_k A^k / Gamma(alpha k + beta)``.

    Raises :class:`SeriesNotDecayed` unless two consecutive term norms drop
    below ``1e-20 * max(1, ||S||_F)`` within *terms* terms.  With
    *return_abs_sum* the sum of term norms is returned as well; its ratio to
    ``||S||_F`` measures cancellation.
    """
    A = as_matrix(A)
    n = A.shape[0]
    alpha, beta = params.alpha, params.beta

    term = np.eye(n, dtype=np.complex128) * math.exp(-gammaln(beta))
    S = term.copy()
    comp = np.zeros_like(S)
    abs_sum = float(np.linalg.norm(term))
    small = 0
    for k in range(1, terms):
        ratio = math.exp(gammaln(alpha * (k - 1) + beta) - gammaln(alpha * k + beta))
        term = (term @ A) * ratio
        tnorm = float(np.linalg.norm(term))
        if not math.isfinite(tnorm):
            break
        abs_sum += tnorm
        # Kahan summation
        y = term - comp
        t = S + y
        comp = (t - S) - y
        S = t
        small = small + 1 if tnorm < SERIES_DECAY * max(1.0, float(np.linalg.norm(S))) else 0
        if small >= 2:
            return (S, abs_sum) if return_abs_sum else S

    raise SeriesNotDecayed(f"series terms did not decay below {SERIES_DECAY:g} in {terms} terms")
