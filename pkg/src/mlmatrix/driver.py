"""End-to-end evaluation of ``E_{alpha,beta}(A)``.

The Taylor gate is tried first.  When it rejects, ``A`` is brought to
blocked Schur form; 1x1 blocks use the scalar function, 2x2 blocks the
divided-difference formula, larger blocks contour quadrature, and the
Parlett recurrence fills in the rest.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from mlmatrix.contour import atomic_block_quadrature
from mlmatrix.errors import ConfluentBlock, PathUnavailable, ZeroReference
from mlmatrix.linalg import as_matrix, norm_estimate
from mlmatrix.params import MLParams
from mlmatrix.parlett import block2x2_ml, blocked_schur, parlett_fill
from mlmatrix.scalar import ml_scalar
from mlmatrix.taylor import DEFAULT_EPS, TaylorPlan, taylor_eval_ps, taylor_plan

PATHS = ("auto", "taylor", "schur")


@dataclass(frozen=True)
class MLComputeOptions:
    eps: float = DEFAULT_EPS
    quad_tol: float = 1.0e-13
    path_override: str = "auto"
    delta_sep: float = 0.1
    initial_m: int = 10
    max_doublings: int = 10

    def __post_init__(self) -> None:
        if not (self.eps > 0 and self.quad_tol > 0 and self.delta_sep > 0):
            raise ValueError("tolerances and delta_sep must be positive")
        if self.path_override not in PATHS:
            raise ValueError(f"path_override must be one of {PATHS}")
        if self.initial_m < 2 or self.max_doublings < 0:
            raise ValueError("initial_m must be >= 2 and max_doublings >= 0")


@dataclass(frozen=True)
class BlockRecord:
    start: int
    size: int
    method: str  # scalar, formula2x2 or quadrature
    m0: int | None = None
    err_est: float | None = None
    radius: float | None = None


@dataclass(frozen=True)
class MLComputeReport:
    result: np.ndarray
    path: str
    plan: TaylorPlan | None
    blocks: list[BlockRecord] = field(default_factory=list)
    norm_two: float | None = None

    def as_dict(self) -> dict:
        """JSON-friendly diagnostics (the matrix itself is omitted)."""
        return {
            "path": self.path,
            "n": int(self.result.shape[0]),
            "norm_two": self.norm_two,
            "plan": None if self.plan is None else self.plan.as_dict(),
            "blocks": [asdict(b) for b in self.blocks],
        }


def _num_workers() -> int:
    try:
        return max(1, int(os.environ.get("ML_NUM_THREADS", "1")))
    except ValueError:
        return 1


def _eval_block(T, start: int, params: MLParams, opts: MLComputeOptions):
    size = T.shape[0]
    if size == 1:
        value = ml_scalar(T[0, 0], params).value
        return np.array([[value]], dtype=np.complex128), BlockRecord(start, 1, "scalar")
    if size == 2:
        try:
            F = block2x2_ml(T[0, 0], T[0, 1], T[1, 1], params)
            return F, BlockRecord(start, 2, "formula2x2")
        except ConfluentBlock:
            pass
    quad, circle = atomic_block_quadrature(
        T,
        params,
        opts.quad_tol,
        initial_m=opts.initial_m,
        max_doublings=opts.max_doublings,
    )
    F = np.triu(np.asarray(quad.integral, dtype=np.complex128))
    return F, BlockRecord(start, size, "quadrature", quad.m0, quad.err_est, circle.radius)


def ml_matrix(A, params: MLParams, opts: MLComputeOptions | None = None) -> MLComputeReport:
    """Compute ``E_{alpha,beta}(A)`` together with path and block diagnostics."""
    opts = opts or MLComputeOptions()
    A = as_matrix(A)
    n = A.shape[0]
    norm_two = norm_estimate(A, "two")

    if opts.path_override != "schur":
        plan = taylor_plan(norm_two, params, opts.eps)
        if plan.accepted:
            F = taylor_eval_ps(A, params, plan.degree)
            return MLComputeReport(F, "taylor", plan, [], norm_two)
        if opts.path_override == "taylor":
            raise PathUnavailable(
                f"Taylor gate rejects ||A||_2 = {norm_two:.4g} "
                f"(norm_max = {plan.norm_max:.4g}, k1 = {plan.k1}, k2 = {plan.k2})"
            )
    else:
        # a forced Schur run records no plan, so path == taylor iff plan.accepted
        plan = None

    if n == 0:
        return MLComputeReport(np.zeros((0, 0), dtype=np.complex128), "schur", plan, [], norm_two)

    blocked = blocked_schur(A, opts.delta_sep)
    T, U = blocked.factors.T, blocked.factors.U
    slices = [blocked.block_slice(i) for i in range(blocked.q)]
    jobs = [(np.ascontiguousarray(T[s, s]), s.start) for s in slices]

    workers = min(_num_workers(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            done = list(pool.map(lambda job: _eval_block(*job, params, opts), jobs))
    else:
        done = [_eval_block(*job, params, opts) for job in jobs]

    F = parlett_fill(blocked, [d[0] for d in done])
    result = U @ F @ U.conj().T
    return MLComputeReport(result, "schur", plan, [d[1] for d in done], norm_two)


def relative_error(X, Xref) -> float:
    Xref = np.asarray(Xref)
    ref = np.linalg.norm(Xref)
    if ref == 0.0:
        raise ZeroReference("reference has zero norm")
    return float(np.linalg.norm(Xref - np.asarray(X)) / ref)


def err_gp(X, Xref) -> float:
    Xref = np.asarray(Xref)
    return float(np.linalg.norm(Xref - np.asarray(X)) / (np.linalg.norm(Xref) + 1.0))
