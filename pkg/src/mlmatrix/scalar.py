"""Scalar Mittag-Leffler function ``E_{alpha,beta}(z)``.

Three evaluation strategies are combined:

* the power series, used when the Taylor gate accepts ``|z|`` and the terms do
  not cancel badly;
* for ``0 < alpha <= 1``, trapezoidal quadrature of the Hankel-path integral

      E(z) = 1/(2 pi i) int_H  y^(alpha-beta) e^y / (y^alpha - z) dy

  on a parabola ``y(u) = mu (1 + iu)^2``;
* for ``alpha > 1``, the root-averaging identity

      E_{alpha,beta}(z) = 1/m sum_j E_{alpha/m,beta}(z^(1/m) e^(2 pi i j/m))

  with ``m = ceil(alpha)``, which lands every term in the ``alpha <= 1`` case.

All internal routines work on 1D arrays of arguments so that the contour
quadrature of the matrix function can evaluate hundreds of points at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

from mlmatrix.errors import NoConvergence, Overflow, TaylorNotApplicable
from mlmatrix.params import MLParams
from mlmatrix.taylor import DEFAULT_EPS, k2_terms, taylor_plan

__all__ = [
    "MLParams",
    "ScalarMLResult",
    "ml_eval",
    "ml_derivative_eval",
    "ml_derivatives_eval",
    "ml_scalar",
    "ml_scalar_contour",
    "ml_scalar_derivative",
    "ml_scalar_grid",
    "ml_scalar_reduce_alpha",
    "ml_scalar_taylor",
]

EPS = np.finfo(float).eps

# parabolic Hankel contour parameters
MU_MIN = 0.5
INITIAL_NODES = 32
MAX_DOUBLINGS = 12

METHOD_TAYLOR = 0
METHOD_CONTOUR = 1
METHOD_REDUCTION = 2
_METHOD_NAMES = ("taylor", "contour", "reduction")


@dataclass(frozen=True)
class ScalarMLResult:
    value: complex
    method: str
    est_error: float


def _gate_eps(tol: float) -> float:
    return min(max(tol, 1.0e-16), 1.0e-8)


# {{{ taylor

def _taylor_accepts(absz: np.ndarray, params: MLParams, eps: float) -> np.ndarray:
    """Vectorized scalar Taylor gate (see :func:`mlmatrix.taylor.taylor_plan`)."""
    alpha, beta = params.alpha, params.beta
    m_max = params.m_max
    if m_max < 1:
        return np.zeros(absz.shape, dtype=bool)
    k2 = k2_terms(eps)
    log_norm_max = (math.log(eps) + gammaln(alpha * m_max + beta)) / m_max

    # k1 <= k2 iff Gamma(alpha m + beta) > a^m for every m in k2..m_max
    m = np.arange(min(k2, m_max), m_max + 1)
    with np.errstate(divide="ignore"):
        log_a = np.log(2.0 * absz)
    ok = np.all(gammaln(alpha * m + beta)[None, :] > m[None, :] * log_a[:, None], axis=1)
    with np.errstate(divide="ignore"):
        return ok & (np.log(absz) <= log_norm_max)


def _taylor_sum(z: np.ndarray, params: MLParams, degree: int, order: int = 0):
    """Kahan-summed series (or its *order*-th derivative) up to *degree* terms.

    Returns the sum and the sum of the absolute values of the terms.
    """
    k = np.arange(order, degree + order + 1)
    args = params.alpha * k + params.beta
    coeffs = rgamma(args)
    if order:
        # falling factorial k (k-1) ... (k-order+1)
        coeffs = coeffs * np.exp(gammaln(k + 1.0) - gammaln(k - order + 1.0))

    total = np.zeros(z.shape, dtype=np.complex128)
    comp = np.zeros_like(total)
    absum = np.zeros(z.shape)
    power = np.ones_like(total)
    for c in coeffs:
        term = c * power
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        absum += np.abs(term)
        power = power * z

    return total, absum


def _taylor_batch(z: np.ndarray, params: MLParams, tol: float):
    """Series values where the gate accepts and cancellation is harmless.

    Returns ``(values, est_errors, mask)``.
    """
    eps = _gate_eps(tol)
    values = np.zeros(z.shape, dtype=np.complex128)
    errors = np.full(z.shape, np.inf)
    mask = _taylor_accepts(np.abs(z), params, eps)
    if not mask.any():
        return values, errors, mask

    degree = min(k2_terms(eps), params.m_max)
    s, absum = _taylor_sum(z[mask], params, degree)
    last = np.abs(z[mask]) ** degree * rgamma(params.alpha * degree + params.beta)
    est = 2.0 * EPS * absum + last

    good = est <= tol * np.maximum(np.abs(s), 1.0)
    idx = np.flatnonzero(mask)
    mask[idx[~good]] = False
    values[idx[good]] = s[good]
    errors[idx[good]] = est[good]
    return values, errors, mask


# }}}


# {{{ hankel contour

def _contour_setup(z: np.ndarray, alpha: float, beta: float):
    """Choose the parabola scale ``mu`` and the poles to treat by residues.

    The only pole of the integrand in the principal sheet is
    ``s = |z|^(1/alpha) exp(i arg(z) / alpha)``, present when
    ``|arg z| < alpha pi`` (always for ``alpha = 1``).  The parabola with
    scale ``mu`` passes through ``s`` exactly when ``mu = (|s| + Re s) / 2``.
    Poles well outside the minimal parabola are excluded from the contour and
    added back as residues; the rest are enclosed with a comfortable margin.
    """
    absz = np.abs(z)
    argz = np.angle(z)
    if alpha == 1.0:
        has_pole = np.ones(z.shape, dtype=bool)
    else:
        has_pole = np.abs(argz) < alpha * np.pi

    with np.errstate(over="ignore"):
        s = absz ** (1.0 / alpha) * np.exp(1j * argz / alpha)
    c = np.where(has_pole, 0.5 * (np.abs(s) + s.real), 0.0)

    # |y^(alpha-beta) e^y| is smallest on the real axis near y = beta - alpha
    mu_base = max(MU_MIN, beta - alpha)
    exclude = has_pole & (c >= 4.0 * MU_MIN)
    mu = np.where(
        exclude,
        np.clip(mu_base, MU_MIN, c / 4.0),
        np.maximum(mu_base, 2.0 * c),
    )
    return mu, s, exclude


def _hankel_integrand(u, mu, z, alpha, beta):
    w = 1.0 + 1j * u
    y = mu * w * w
    logy = np.log(y)
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.exp((alpha - beta) * logy + y) / (np.exp(alpha * logy) - z)
    return f * w * (mu / np.pi)


def _contour_batch(z: np.ndarray, params: MLParams, tol: float):
    """Hankel-path quadrature for every entry of *z* (``alpha <= 1``).

    Returns ``(values, est_errors, converged)``.
    """
    alpha, beta = params.alpha, params.beta
    if alpha > 1.0:
        raise ValueError("contour quadrature requires alpha <= 1")

    mu, s, exclude = _contour_setup(z, alpha, beta)

    residue = np.zeros(z.shape, dtype=np.complex128)
    if exclude.any():
        se = s[exclude]
        with np.errstate(over="ignore", invalid="ignore"):
            residue[exclude] = np.exp((1.0 - beta) * np.log(se) + se) / alpha

    # truncate the real line where |e^y| has dropped far below the tolerance
    L = math.log(1.0 / max(tol, 1.0e-300)) + 12.0
    U = np.sqrt(1.0 + L / mu)

    nz = z.size
    values = np.zeros(nz, dtype=np.complex128)
    errors = np.full(nz, np.inf)
    converged = np.zeros(nz, dtype=bool)

    # nodes u = U x with x on a uniform grid of [-1, 1]
    n = INITIAL_NODES
    x = np.linspace(-1.0, 1.0, n + 1)
    f = _hankel_integrand(U[:, None] * x[None, :], mu[:, None], z[:, None], alpha, beta)
    fsum = f.sum(axis=1)
    fabs = np.abs(f).sum(axis=1)
    integral = fsum * (2.0 * U / n)

    # an overflowing residue decides the value; skip the quadrature
    active = np.flatnonzero(np.isfinite(residue))
    for _ in range(MAX_DOUBLINGS):
        if active.size == 0:
            break
        xm = -1.0 + (2.0 * np.arange(n) + 1.0) / n
        Ua = U[active]
        f = _hankel_integrand(
            Ua[:, None] * xm[None, :], mu[active, None], z[active, None], alpha, beta
        )
        fsum[active] += f.sum(axis=1)
        fabs[active] += np.abs(f).sum(axis=1)
        n *= 2
        new = fsum[active] * (2.0 * Ua / n)

        diff = np.abs(new - integral[active])
        total = new + residue[active]
        noise = 16.0 * EPS * fabs[active] * (2.0 * Ua / n)
        done = np.isfinite(total) & (
            diff <= np.maximum(tol * np.abs(total), noise)
        )
        integral[active] = new

        idx = active[done]
        values[idx] = total[done]
        errors[idx] = diff[done]
        converged[idx] = True
        active = active[~done]
        if active.size == 0:
            break

    if active.size:
        values[active] = integral[active] + residue[active]
        errors[active] = np.inf

    # a residue beyond the double range means the function overflows
    overflow = ~np.isfinite(residue) | ~np.isfinite(values)
    values[overflow] = np.inf
    converged[overflow] = True
    return values, errors, converged


# }}}


# {{{ dispatch

def _ml_batch(z: np.ndarray, params: MLParams, tol: float):
    """Evaluate ``E_{alpha,beta}`` on a 1D array.

    Returns ``(values, est_errors, methods, converged)``; overflowing entries
    are returned as ``inf``.
    """
    z = np.asarray(z, dtype=np.complex128)
    values = np.zeros(z.shape, dtype=np.complex128)
    errors = np.zeros(z.shape)
    methods = np.full(z.shape, METHOD_TAYLOR, dtype=np.int8)
    converged = np.ones(z.shape, dtype=bool)

    zero = z == 0
    values[zero] = rgamma(params.beta)

    rest = np.flatnonzero(~zero)
    if rest.size == 0:
        return values, errors, methods, converged

    tv, te, tmask = _taylor_batch(z[rest], params, tol)
    values[rest[tmask]] = tv[tmask]
    errors[rest[tmask]] = te[tmask]
    rest = rest[~tmask]
    if rest.size == 0:
        return values, errors, methods, converged

    if params.alpha <= 1.0:
        cv, ce, cc = _contour_batch(z[rest], params, tol)
        methods[rest] = METHOD_CONTOUR
    else:
        cv, ce, cc = _reduce_batch(z[rest], params, tol)
        methods[rest] = METHOD_REDUCTION

    values[rest] = cv
    errors[rest] = ce
    converged[rest] = cc
    return values, errors, methods, converged


def _reduce_batch(z: np.ndarray, params: MLParams, tol: float):
    m = math.ceil(params.alpha)
    inner = MLParams(params.alpha / m, params.beta)
    absz = np.abs(z)
    argz = np.angle(z)

    j = np.arange(m)
    roots = (absz[:, None] ** (1.0 / m)) * np.exp(
        1j * (argz[:, None] + 2.0 * np.pi * j[None, :]) / m
    )
    v, e, _, c = _ml_batch(roots.ravel(), inner, tol)
    v = v.reshape(roots.shape)
    with np.errstate(invalid="ignore"):
        values = v.mean(axis=1)
    values[~np.all(np.isfinite(v), axis=1)] = np.inf
    errors = e.reshape(roots.shape).max(axis=1)
    converged = c.reshape(roots.shape).all(axis=1)
    return values, errors, converged


def ml_eval(z, params: MLParams, tol: float = 1.0e-15) -> np.ndarray:
    """Vectorized ``E_{alpha,beta}(z)``; overflowing entries are ``inf``.

    :raises NoConvergence: if any entry fails to converge.
    """
    z = np.asarray(z, dtype=np.complex128)
    values, _, _, converged = _ml_batch(z.ravel(), params, tol)
    if not converged.all():
        bad = z.ravel()[~converged][0]
        raise NoConvergence(f"scalar ML evaluation did not converge at z={bad}")
    return values.reshape(z.shape)


def ml_scalar(z: complex, params: MLParams, tol: float = 1.0e-15) -> ScalarMLResult:
    """Evaluate ``E_{alpha,beta}(z)`` for a single complex argument."""
    if tol < 1.0e-15:
        raise ValueError(f"tol must be at least 1e-15, got {tol}")
    values, errors, methods, converged = _ml_batch(np.array([z]), params, tol)
    value = complex(values[0])
    if not np.isfinite(value):
        raise Overflow(f"E_{{{params.alpha},{params.beta}}}({z}) exceeds the double range")
    if not converged[0]:
        raise NoConvergence(f"no strategy reached tol={tol} at z={z}")
    return ScalarMLResult(value, _METHOD_NAMES[methods[0]], float(errors[0]))


def ml_scalar_taylor(z: complex, params: MLParams, tol: float = DEFAULT_EPS) -> complex:
    """Series evaluation with ``k2 + 1`` compensated terms, when the gate allows it."""
    eps = _gate_eps(tol)
    plan = taylor_plan(abs(z), params, eps)
    if not plan.accepted:
        raise TaylorNotApplicable(f"Taylor gate rejects |z| = {abs(z):.6g}")
    s, _ = _taylor_sum(np.array([z], dtype=np.complex128), params, plan.degree)
    return complex(s[0])


def ml_scalar_contour(z: complex, params: MLParams, tol: float = 1.0e-15) -> complex:
    """Hankel-path quadrature for ``0 < alpha <= 1``."""
    if not 0.0 < params.alpha <= 1.0:
        raise ValueError("contour evaluation requires 0 < alpha <= 1")
    if z == 0:
        return complex(rgamma(params.beta))
    values, _, converged = _contour_batch(np.array([z], dtype=np.complex128), params, tol)
    if not np.isfinite(values[0]):
        raise Overflow(f"E({z}) exceeds the double range")
    if not converged[0]:
        raise NoConvergence(f"contour quadrature did not converge at z={z}")
    return complex(values[0])


def ml_scalar_reduce_alpha(z: complex, params: MLParams, tol: float = 1.0e-15) -> complex:
    """Root-averaging reduction of ``alpha > 1`` to ``alpha / ceil(alpha) <= 1``."""
    if params.alpha <= 1.0:
        raise ValueError("reduction requires alpha > 1")
    values, _, converged = _reduce_batch(np.array([z], dtype=np.complex128), params, tol)
    if not np.isfinite(values[0]):
        raise Overflow(f"E({z}) exceeds the double range")
    if not converged[0]:
        raise NoConvergence(f"reduced evaluation did not converge at z={z}")
    return complex(values[0])


# }}}


# {{{ derivatives

#: five-point central difference stencils
_FD_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_FD_WEIGHTS = {
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


def ml_derivatives_eval(z, params: MLParams, tol: float = 1.0e-15):
    """First and second derivatives of ``E_{alpha,beta}`` on an array.

    Term-wise differentiated series where the Taylor gate accepts, five-point
    central differences with step ``1e-3 max(1, |z|)`` elsewhere.  Accurate
    to roughly 1e-4 relative, which is all the radius search needs.
    """
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    d1 = np.empty(flat.shape, dtype=np.complex128)
    d2 = np.empty(flat.shape, dtype=np.complex128)

    eps = _gate_eps(tol)
    series = _taylor_accepts(np.abs(flat), params, eps)
    if series.any():
        degree = min(k2_terms(eps), params.m_max - 2)
        d1[series], _ = _taylor_sum(flat[series], params, degree, order=1)
        d2[series], _ = _taylor_sum(flat[series], params, degree, order=2)

    rest = ~series
    if rest.any():
        zr = flat[rest]
        h = 1.0e-3 * np.maximum(1.0, np.abs(zr))
        pts = zr[:, None] + h[:, None] * _FD_OFFSETS[None, :]
        vals = ml_eval(pts, params, tol)
        with np.errstate(invalid="ignore"):
            d1[rest] = (vals @ _FD_WEIGHTS[1]) / h
            d2[rest] = (vals @ _FD_WEIGHTS[2]) / h**2

    return d1.reshape(z.shape), d2.reshape(z.shape)


def ml_derivative_eval(z, params: MLParams, order: int, tol: float = 1.0e-15) -> np.ndarray:
    """Vectorized first or second derivative, see :func:`ml_derivatives_eval`."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return ml_derivatives_eval(z, params, tol)[order - 1]


def ml_scalar_derivative(z: complex, params: MLParams, order: int, tol: float = 1.0e-15) -> complex:
    value = complex(ml_derivative_eval(np.array([z]), params, order, tol)[0])
    if not np.isfinite(value):
        raise Overflow(f"derivative of E at {z} exceeds the double range")
    return value


# }}}


def ml_scalar_grid(rect, steps, params: MLParams, tol: float = 1.0e-15) -> np.ndarray:
    """``|E_{alpha,beta}|`` on an evenly spaced grid over a rectangle.

    Returns an array of shape ``(n_re, n_im)``: entry ``[i, j]`` belongs to
    ``re[i] + 1j * im[j]``, so a C-order traversal walks the real axis in the
    outer loop.  Overflowing cells hold ``inf``.
    """
    re_min, re_max, im_min, im_max = rect
    n_re, n_im = steps
    if n_re < 1 or n_im < 1:
        raise ValueError("each grid dimension needs at least 1 step")
    re = np.linspace(re_min, re_max, n_re)
    im = np.linspace(im_min, im_max, n_im)
    z = re[:, None] + 1j * im[None, :]
    return np.abs(ml_eval(z, params, tol))
