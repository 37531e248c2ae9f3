"""Taylor series path: the applicability gate and polynomial evaluation.

The gate decides from a norm of the argument alone whether the truncated
series

    E(A) ~ sum_{k=0}^{k2} A^k / Gamma(alpha k + beta)

can be trusted.  It uses the tail bound ``b^(m+1) / (1 - b)`` which holds once
``Gamma(alpha k + beta) >= a^k`` for all ``k >= m`` and ``b = ||A|| / a < 1``,
with ``a = 2 ||A||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from mlmatrix.errors import GammaOverflow, InvalidRatio, NormTooLarge
from mlmatrix.params import GAMMA_ARG_MAX, MLParams

DEFAULT_EPS = 1.0e-15


@dataclass(frozen=True)
class TaylorPlan:
    accepted: bool
    m_max: int
    norm_max: float
    k1: int | None
    k2: int
    a: float
    b: float
    matrix_norm: float

    @property
    def degree(self) -> int:
        """Degree of the polynomial actually evaluated."""
        return min(self.k2, self.m_max)

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "m_max": self.m_max,
            "norm_max": self.norm_max,
            "k1": self.k1,
            "k2": self.k2,
            "a": self.a,
            "b": self.b,
            "matrix_norm": self.matrix_norm,
        }


def k2_terms(eps: float, b: float = 0.5) -> int:
    return math.ceil(math.log(eps * (1.0 - b)) / math.log(b) - 1.0)


K1_RULES = ("tail", "first")


def taylor_plan(
    matrix_norm: float,
    params: MLParams,
    eps: float = DEFAULT_EPS,
    *,
    k1_rule: str = "tail",
) -> TaylorPlan:
    """Decide whether the Taylor series is suitable for a matrix of this norm.

    With ``k1_rule="tail"`` (default) ``k1`` is the smallest ``m`` such that
    ``Gamma(alpha k + beta) > a^k`` for every ``k`` in ``m..m_max``, which is
    what the tail bound needs.  ``"first"`` takes the first ``m`` where the
    inequality holds; for large ``beta`` it can hold at ``m = 1``, fail again
    later and accept matrices whose truncated series is far off.
    """
    if k1_rule not in K1_RULES:
        raise ValueError(f"k1_rule must be one of {K1_RULES}")
    if not 1.0e-16 <= eps <= 1.0e-8:
        raise ValueError(f"eps must lie in [1e-16, 1e-8], got {eps}")
    alpha, beta = params.alpha, params.beta
    m_max = params.m_max
    a = 2.0 * matrix_norm
    b = 0.5
    k2 = k2_terms(eps, b)

    if m_max < 1:
        return TaylorPlan(False, m_max, 0.0, None, k2, a, b, matrix_norm)

    norm_max = math.exp((math.log(eps) + gammaln(alpha * m_max + beta)) / m_max)

    # Gamma(alpha m + beta) > a^m, compared in log space
    m = np.arange(1, m_max + 1)
    log_a = math.log(a) if a > 0 else -math.inf
    holds = gammaln(alpha * m + beta) > m * log_a
    if k1_rule == "first":
        positive = np.nonzero(holds)[0]
        k1 = int(m[positive[0]]) if positive.size else None
    elif not holds[-1]:
        k1 = None
    else:
        failing = np.nonzero(~holds)[0]
        k1 = int(m[failing[-1] + 1]) if failing.size else 1

    accepted = matrix_norm <= norm_max and k1 is not None and k1 <= k2
    return TaylorPlan(bool(accepted), m_max, norm_max, k1, k2, a, b, matrix_norm)


def min_terms_prop1(matrix_norm: float, params: MLParams, eps: float = DEFAULT_EPS) -> int:
    """Number of terms guaranteeing a truncation error below *eps* when ``||A|| < 1``."""
    if matrix_norm >= 1.0:
        raise NormTooLarge(f"norm {matrix_norm} is not below 1")
    first = math.ceil((2.0 - params.beta) / params.alpha + 1.0)
    if matrix_norm == 0.0:
        return max(first, 1)
    second = math.ceil(math.log(eps * (1.0 - matrix_norm)) / math.log(matrix_norm)) + 1
    return max(first, second)


def truncation_bound_prop2(matrix_norm: float, mu: float) -> float:
    """Tail bound ``mu ||A|| / (1 - ||A||)`` given the first omitted term is below *mu*."""
    if matrix_norm >= 1.0:
        raise NormTooLarge(f"norm {matrix_norm} is not below 1")
    return mu * matrix_norm / (1.0 - matrix_norm)


def truncation_bound_prop3(b: float, m: int) -> float:
    """Tail bound ``b^(m+1) / (1 - b)``."""
    if not 0.0 < b < 1.0:
        raise InvalidRatio(f"ratio b = {b} must lie in (0, 1)")
    return b ** (m + 1) / (1.0 - b)


def series_coefficients(params: MLParams, degree: int) -> np.ndarray:
    """``1 / Gamma(alpha k + beta)`` for ``k = 0, ..., degree``."""
    k = np.arange(degree + 1)
    args = params.alpha * k + params.beta
    if args[-1] > GAMMA_ARG_MAX:
        raise GammaOverflow(
            f"Gamma({args[-1]:.3f}) overflows; degree {degree} exceeds m_max={params.m_max}"
        )
    return np.exp(-gammaln(args))


def paterson_stockmeyer(coeffs, A) -> tuple[np.ndarray, int]:
    """Evaluate ``sum_k coeffs[k] A^k`` and count the matrix products used.

    With ``s = ceil(sqrt(d))`` the powers ``A^2, ..., A^s`` cost ``s - 1``
    products, and the outer Horner recurrence in ``A^s`` costs ``floor(d/s)``
    more, one fewer when ``s`` divides ``d``.
    """
    A = np.asarray(A, dtype=np.complex128)
    coeffs = np.asarray(coeffs)
    n = A.shape[0]
    d = len(coeffs) - 1
    eye = np.eye(n, dtype=np.complex128)
    if d == 0:
        return coeffs[0] * eye, 0

    s = math.ceil(math.sqrt(d))
    nmults = 0
    powers = [eye, A]
    for _ in range(2, s + 1):
        powers.append(powers[-1] @ A)
        nmults += 1

    def block(i: int) -> np.ndarray:
        chunk = coeffs[i * s : min(d + 1, (i + 1) * s)]
        out = np.zeros((n, n), dtype=np.complex128)
        for c, P in zip(chunk, powers):
            out += c * P
        return out

    r = d // s
    As = powers[s]
    if d == r * s:
        P = coeffs[d] * As + block(r - 1)
        start = r - 2
    else:
        P = block(r)
        start = r - 1
    for i in range(start, -1, -1):
        P = P @ As + block(i)
        nmults += 1

    return P, nmults


def taylor_eval_ps(A, params: MLParams, degree: int, *, return_mults: bool = False):
    """Degree-*degree* Taylor polynomial of ``E_{alpha,beta}`` at *A*."""
    coeffs = series_coefficients(params, degree)
    F, nmults = paterson_stockmeyer(coeffs, A)
    if return_mults:
        return F, nmults
    return F
