"""Benchmark suites mirroring the numerical experiments.

Every case records the chosen path, the measured two-norm and Taylor gate
values, the relative error against the best available reference, the mean
wall time over the repeats and the largest quadrature node count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from mlmatrix.driver import MLComputeOptions, ml_matrix, relative_error
from mlmatrix.errors import MLError
from mlmatrix.linalg import UNIT_ROUNDOFF
from mlmatrix.params import MLParams
from mlmatrix import testgen
from mlmatrix.scalar import ml_eval

SUITES = ("redheffer", "table1", "gallery-like", "atomic")

#: a series reference is trusted only if its cancellation costs at most this much
SERIES_TRUST = 1.0e-9

COLUMNS = (
    "case",
    "matrix",
    "alpha",
    "beta",
    "path",
    "norm_two",
    "norm_max",
    "k1",
    "k2",
    "oracle",
    "rel_err",
    "time_s",
    "m0_max",
)


@dataclass(frozen=True)
class BenchCase:
    case: int
    matrix: str
    A: np.ndarray
    params: MLParams
    reference: Callable[[], tuple[str, np.ndarray | None]]


def series_reference(A, params):
    def ref():
        try:
            S, abs_sum = testgen.oracle_series(A, params, 2000, return_abs_sum=True)
        except MLError:
            return "no-oracle", None
        if abs_sum * UNIT_ROUNDOFF > SERIES_TRUST * np.linalg.norm(S):
            return "no-oracle", None
        return "series", S

    return ref


def eigen_reference(A, params, max_cond: float = 1.0e6):
    """Diagonalization reference for well-conditioned eigenvectors, else the series."""

    def ref():
        w, V = np.linalg.eig(A)
        if np.linalg.cond(V) <= max_cond:
            Ew = ml_eval(w, params)
            if np.all(np.isfinite(Ew)):
                return "diagonalization", (V * Ew) @ np.linalg.inv(V)
        return series_reference(A, params)()

    return ref


def _cases_redheffer(seed, alpha=0.8):
    A = -testgen.gen_redheffer(20)
    return [
        BenchCase(i, "-redheffer20", A, MLParams(alpha, float(b)), series_reference(A, MLParams(alpha, float(b))))
        for i, b in enumerate(range(1, 11))
    ]


def _cases_table1(seed):
    cases = []
    for name, spec in testgen.table1_specs(seed).items():
        A = testgen.gen_prescribed_spectrum(spec)
        for alpha in (0.6, 1.0, 1.4, 1.8, 2.2, 2.6):
            params = MLParams(alpha, 1.0)
            ref = (lambda s=spec, p=params: ("diagonalization", testgen.diagonalization_oracle(s, p)))
            cases.append(BenchCase(len(cases), name, A, params, ref))
    return cases


def _cases_gallery(seed):
    params = MLParams(0.8, 2.0)
    return [
        BenchCase(i, name, A, params, eigen_reference(A, params))
        for i, (name, A) in enumerate(testgen.gen_gallery_like(30).items())
    ]


def _cases_atomic(seed):
    params = MLParams(0.5, 1.2)
    return [
        BenchCase(i, f"atomic{i + 1}", T, params, series_reference(T, params))
        for i, T in enumerate(testgen.gen_atomic_suite(seed))
    ]


def build_cases(suite: str, seed: int = 0) -> list[BenchCase]:
    makers = {
        "redheffer": _cases_redheffer,
        "table1": _cases_table1,
        "gallery-like": _cases_gallery,
        "atomic": _cases_atomic,
    }
    if suite not in makers:
        raise ValueError(f"unknown suite {suite!r}")
    return makers[suite](seed)


def run_case(case: BenchCase, opts: MLComputeOptions, repeat: int = 1) -> dict:
    row = {
        "case": case.case,
        "matrix": case.matrix,
        "alpha": case.params.alpha,
        "beta": case.params.beta,
    }
    try:
        elapsed = []
        for _ in range(max(1, repeat)):
            t0 = time.perf_counter()
            report = ml_matrix(case.A, case.params, opts)
            elapsed.append(time.perf_counter() - t0)
    except MLError as exc:
        row.update(path=f"error:{exc.name}", oracle="none", rel_err=None, time_s=None, m0_max=None)
        return row

    plan = report.plan
    m0s = [b.m0 for b in report.blocks if b.m0 is not None]
    oracle, ref = case.reference()
    if ref is None and report.path == "taylor":
        # cross-path check against the Schur route
        try:
            ref = ml_matrix(case.A, case.params, _override(opts, "schur")).result
            oracle = "cross-path"
        except MLError:
            pass
    row.update(
        path=report.path,
        norm_two=report.norm_two,
        norm_max=None if plan is None else plan.norm_max,
        k1=None if plan is None else plan.k1,
        k2=None if plan is None else plan.k2,
        oracle=oracle,
        rel_err=None if ref is None else relative_error(report.result, ref),
        time_s=float(np.mean(elapsed)),
        m0_max=max(m0s) if m0s else None,
    )
    return row


def _override(opts: MLComputeOptions, path: str) -> MLComputeOptions:
    return replace(opts, path_override=path)


def run_suite(
    suite: str,
    seed: int = 0,
    *,
    opts: MLComputeOptions | None = None,
    repeat: int = 1,
    workers: int = 1,
) -> list[dict]:
    """Rows ordered by case id regardless of completion order."""
    opts = opts or MLComputeOptions()
    cases = build_cases(suite, seed)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda c: run_case(c, opts, repeat), cases))
    else:
        rows = [run_case(c, opts, repeat) for c in cases]
    return sorted(rows, key=lambda r: r["case"])
