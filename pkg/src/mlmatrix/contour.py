"""Cauchy-integral evaluation of ``E_{alpha,beta}`` on an atomic triangular block.

For a block ``T`` with clustered eigenvalues the circle ``z0 + r e^{it}`` is
centred at the mean eigenvalue, and

    E(T) = 1/(2 pi) int_0^{2 pi} r e^{it} E(z0 + r e^{it}) ((z0 + r e^{it}) I - T)^{-1} dt

is computed with the periodic trapezoidal rule, doubling the node count
until two successive sums agree.  The radius minimizes (over a coarse grid)
a cheap scalar bound on ``max_t ||g''(t)||_F``, which controls the
trapezoidal error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.special import comb

from mlmatrix.errors import NoConvergence, NoViableRadius, Overflow
from mlmatrix.linalg import shifted_triangular_solve
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_derivatives_eval, ml_eval

#: tolerance used for scalar ML values on the contour
SCALAR_TOL = 1.0e-15

N_RADII = 20
N_ANGLES = 32
R_UPPER = 3.0


@dataclass(frozen=True)
class ContourCircle:
    center: complex
    radius: float
    eig_radius: float

    def __post_init__(self) -> None:
        if not self.radius > self.eig_radius:
            raise ValueError(
                f"radius {self.radius} does not enclose the spectrum (d = {self.eig_radius})"
            )

    def point(self, t):
        return self.center + self.radius * np.exp(1j * np.asarray(t))


@dataclass(frozen=True)
class QuadratureResult:
    integral: np.ndarray
    m0: int
    err_est: float
    history: list[float] = field(default_factory=list)


def contour_center(T) -> complex:
    T = np.asarray(T)
    return complex(np.trace(T) / T.shape[0])


def eigen_radius(T, z0: complex) -> float:
    return float(np.max(np.abs(np.diag(T) - z0)))


# {{{ radius selection

def gamma_factors(rd, n: int):
    """The constants ``gamma_1, gamma_2, gamma_3`` for ``r - delta = rd``.

    ``gamma_1 = max_j rd^-j``, ``gamma_2 = max_j j rd^-(j+1)`` and
    ``gamma_3 = max_j j (j + 1) / 2 rd^-(j+2)`` over ``j = 1, ..., n``.
    """
    rd = np.asarray(rd, dtype=float)[..., None]
    j = np.arange(1, n + 1, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        g1 = np.max(rd ** (-j), axis=-1)
        g2 = np.max(j * rd ** (-j - 1), axis=-1)
        g3 = np.max(0.5 * j * (j + 1) * rd ** (-j - 2), axis=-1)
    return g1, g2, g3


def resolvent_power_constant(r: float, delta: float, n: int, k: int) -> float:
    """``max_j C(k+j-1, j) (r - delta)^(-k-j)`` over ``j = 0, ..., n-1``.

    Multiplied by ``||(I - |N|)^{-1}||_F`` this bounds the Frobenius norm of
    the ``k``-th power of the resolvent anywhere on the circle of radius *r*.
    """
    j = np.arange(n)
    return float(np.max(comb(k + j - 1, j) * (r - delta) ** (-k - j)))


def abs_nilpotent_factor(T) -> float:
    """``||(I - |N|)^{-1}||_F`` for the strictly upper part ``N`` of *T*."""
    T = np.asarray(T)
    n = T.shape[0]
    M = np.eye(n) - np.abs(np.triu(T, 1))
    return float(np.linalg.norm(sla.solve_triangular(M, np.eye(n)), "fro"))


def g2pp_bound(r, t, circle: ContourCircle, n: int, params: MLParams):
    """Scalar bound on ``||g''(r, t)||_F`` up to the factor ``||(I-|N|)^{-1}||_F``.

    *r* and *t* broadcast against each other.  The disk radius of the
    underlying resolvent estimate is taken as the eigenvalue radius ``d``.
    Points where the scalar function overflows give ``inf``.
    """
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    if np.any(r <= circle.eig_radius):
        raise ValueError("radius must exceed the eigenvalue radius")

    e = np.exp(1j * t)
    z = circle.center + r * e
    E = ml_eval(z, params, SCALAR_TOL)
    dE, d2E = ml_derivatives_eval(z, params, SCALAR_TOL)

    g1 = r * e
    g1p = 1j * r * e
    g1pp = -r * e
    g2 = E
    g2p = dE * g1p
    g2pp = d2E * g1p**2 + dE * g1pp

    gam1, gam2, gam3 = gamma_factors(r - circle.eig_radius, n)
    with np.errstate(invalid="ignore", over="ignore"):
        bound = (
            np.abs(g1pp * g2 + 2.0 * g1p * g2p + g1 * g2pp) * gam1
            + 2.0 * r * np.abs(g1p * g2 + g1 * g2p) * gam2
            + r * np.abs(g1 * g2) * (gam2 + 2.0 * r * gam3)
        )
    return np.where(np.isfinite(bound), bound, np.inf)


def radius_grid(d: float) -> np.ndarray:
    lo = d + 0.05 * max(d, 1.0)
    hi = max(R_UPPER, d + 1.0)
    return lo + (hi - lo) * np.arange(1, N_RADII + 1) / N_RADII


def angle_grid() -> np.ndarray:
    return 2.0 * np.pi * np.arange(N_ANGLES) / N_ANGLES


def radius_objective(T, params: MLParams) -> tuple[np.ndarray, np.ndarray]:
    """Candidate radii and the maximum of the ``g''`` bound over the angles."""
    T = np.asarray(T)
    z0 = contour_center(T)
    d = eigen_radius(T, z0)
    radii = radius_grid(d)
    circle = ContourCircle(z0, float(radii[-1]), d)
    bound = g2pp_bound(radii[:, None], angle_grid()[None, :], circle, T.shape[0], params)
    return radii, bound.max(axis=1)


def select_radius(T, params: MLParams) -> ContourCircle:
    """Coarse grid solution of ``min_r max_t ||g''(r, t)||``."""
    T = np.asarray(T)
    z0 = contour_center(T)
    d = eigen_radius(T, z0)
    radii, worst = radius_objective(T, params)
    if not np.isfinite(worst).any():
        raise NoViableRadius("the scalar function overflows on every candidate circle")
    # argmin returns the first, i.e. smallest, minimizing radius
    return ContourCircle(z0, float(radii[np.argmin(worst)]), d)


# }}}


# {{{ quadrature

def integrand_g(
    t,
    circle: ContourCircle,
    T,
    params: MLParams,
    scalar_fn: Callable | None = None,
) -> np.ndarray:
    """``r e^{it} E(z(t)) (z(t) I - T)^{-1}`` for each angle in *t*.

    Returns an array of shape ``(len(t), n, n)``.  *scalar_fn* replaces the
    scalar function (vectorized over its argument) when given.
    """
    T = np.asarray(T, dtype=np.complex128)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = T.shape[0]
    z = circle.point(t)
    if scalar_fn is None:
        scale = ml_eval(z, params, SCALAR_TOL)
    else:
        scale = np.asarray(scalar_fn(z), dtype=np.complex128) * np.ones_like(z)
    if not np.all(np.isfinite(scale)):
        raise Overflow("the scalar function overflows on the contour")
    scale = scale * circle.radius * np.exp(1j * t)

    eye = np.eye(n, dtype=np.complex128)
    out = np.empty((t.size, n, n), dtype=np.complex128)
    for i, zi in enumerate(z):
        out[i] = scale[i] * shifted_triangular_solve(T, zi, eye)
    return out


def _sum_nodes(g, t, conjugate_symmetric: bool):
    """Sum ``g`` over the angles *t*, which must be symmetric about ``pi``
    when *conjugate_symmetric* holds; then only ``t <= pi`` is evaluated."""
    if not conjugate_symmetric:
        return np.sum(g(t), axis=0)

    upper = t[t < np.pi - 1.0e-12]
    lower_count = t.size - upper.size
    total = 0.0
    if upper.size:
        vals = np.sum(g(upper), axis=0)
        # nodes t and 2 pi - t contribute conjugate values
        special = upper[(upper < 1.0e-12)]
        if special.size:
            g0 = np.sum(g(special), axis=0)
            vals = vals - g0
            total = total + g0.real
        total = total + 2.0 * vals.real
    if lower_count and np.any(np.isclose(t, np.pi)):
        total = total + g(np.array([np.pi]))[0].real
    return total


def trapezoid_adaptive(
    g: Callable,
    tol: float,
    initial_m: int = 10,
    max_doublings: int = 10,
    *,
    conjugate_symmetric: bool = False,
) -> QuadratureResult:
    """Periodic trapezoidal rule on ``[0, 2 pi]`` with node doubling.

    *g* maps an array of angles to an array of values (scalars or matrices)
    stacked along the first axis.  The estimate ``||T_2m - T_m||_F`` is
    scaled by ``max(1, ||T_2m||_F)``; iteration stops once it drops to *tol*.
    With *conjugate_symmetric* (``g(2 pi - t) = conj(g(t))``, e.g. a real
    block on a circle centred on the real axis) only angles in ``[0, pi]``
    are evaluated and the result is real.
    """
    if initial_m < 2:
        raise ValueError("initial_m must be at least 2")
    if conjugate_symmetric and initial_m % 2:
        raise ValueError("the conjugate-symmetric rule needs an even node count")

    m = initial_m
    t = 2.0 * np.pi * np.arange(m) / m
    total = _sum_nodes(g, t, conjugate_symmetric)
    current = (2.0 * np.pi / m) * total

    history: list[float] = []
    for _ in range(max_doublings):
        t_new = (2.0 * np.arange(m) + 1.0) * np.pi / m
        total = total + _sum_nodes(g, t_new, conjugate_symmetric)
        refined = (np.pi / m) * total
        diff = float(np.linalg.norm(np.atleast_1d(refined - current)))
        size = float(np.linalg.norm(np.atleast_1d(refined)))
        err = diff / max(1.0, size)
        history.append(err)
        m *= 2
        current = refined
        if err <= tol:
            return QuadratureResult(current, m, err, history)

    raise NoConvergence(
        f"trapezoidal rule did not reach tol={tol:.1e} with {m} nodes "
        f"(last estimate {history[-1]:.2e})"
    )


def is_real_block(T) -> bool:
    T = np.asarray(T)
    return not np.iscomplexobj(T) or bool(np.all(T.imag == 0.0))


def atomic_block_quadrature(
    T,
    params: MLParams,
    tol: float,
    *,
    initial_m: int = 10,
    max_doublings: int = 10,
    circle: ContourCircle | None = None,
) -> tuple[QuadratureResult, ContourCircle]:
    """Quadrature of the normalized Cauchy integral for one atomic block."""
    T = np.asarray(T, dtype=np.complex128)
    if circle is None:
        circle = select_radius(T, params)

    symmetric = is_real_block(T) and initial_m % 2 == 0

    def g(t):
        return integrand_g(t, circle, T, params) / (2.0 * np.pi)

    result = trapezoid_adaptive(
        g, tol, initial_m, max_doublings, conjugate_symmetric=symmetric
    )
    return result, circle


def atomic_block_ml(T, params: MLParams, tol: float = 1.0e-13, **kwargs) -> np.ndarray:
    """``E_{alpha,beta}(T)`` for an atomic upper triangular block."""
    result, _ = atomic_block_quadrature(T, params, tol, **kwargs)
    return np.triu(result.integral).astype(np.complex128)


# }}}
