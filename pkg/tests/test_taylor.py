from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from conftest import random_complex
from mlmatrix.errors import GammaOverflow, InvalidRatio, NormTooLarge
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_scalar_taylor
from mlmatrix.taylor import (
    k2_terms,
    min_terms_prop1,
    paterson_stockmeyer,
    series_coefficients,
    taylor_eval_ps,
    taylor_plan,
    truncation_bound_prop2,
    truncation_bound_prop3,
)


def horner(coeffs, A):
    n = A.shape[0]
    P = coeffs[-1] * np.eye(n, dtype=complex)
    for c in coeffs[-2::-1]:
        P = P @ A + c * np.eye(n)
    return P


class TestPlan:
    def test_k2_is_50(self):
        assert k2_terms(1e-15) == 50
        for norm in (0.0, 0.1, 3.0, 100.0):
            assert taylor_plan(norm, MLParams(0.7, 1.3), 1e-15).k2 == 50

    def test_exp_unit_norm(self):
        plan = taylor_plan(1.0, MLParams(1, 1))
        assert plan.k1 == 4 and plan.accepted
        assert plan.a == 2.0 and plan.b == 0.5

    def test_rejects_small_alpha_large_norm(self):
        plan = taylor_plan(20.0, MLParams(0.5, 1))
        assert not plan.accepted

    def test_m_max(self):
        assert taylor_plan(1.0, MLParams(0.5, 0.8)).m_max == 341

    def test_norm_max_formula(self):
        p = MLParams(0.8, 2.0)
        plan = taylor_plan(1.0, p, 1e-15)
        expected = (1e-15 * gamma(0.8 * plan.m_max + 2.0)) ** (1.0 / plan.m_max)
        assert plan.norm_max == pytest.approx(expected, rel=1e-12)

    def test_eps_range(self):
        for eps in (1e-17, 1e-7):
            with pytest.raises(ValueError):
                taylor_plan(1.0, MLParams(1, 1), eps)

    def test_zero_norm(self):
        plan = taylor_plan(0.0, MLParams(0.3, 4.0))
        assert plan.accepted and plan.k1 == 1

    def test_degree_capped_by_m_max(self):
        plan = taylor_plan(0.1, MLParams(5.0, 1.0))
        assert plan.m_max == 34 and plan.degree == 34

    def test_tail_rule_vs_first_rule(self):
        # Gamma(0.5 m + 5) beats 13.2^m at m = 1 but loses for larger m
        p = MLParams(0.5, 5.0)
        first = taylor_plan(6.6, p, k1_rule="first")
        tail = taylor_plan(6.6, p)
        assert first.k1 == 1 and first.accepted
        assert tail.k1 is None and not tail.accepted

    def test_tail_rule_k1_holds_afterwards(self):
        p = MLParams(0.8, 4.0)
        plan = taylor_plan(6.6, p)
        m = np.arange(plan.k1, plan.m_max + 1)
        assert np.all([math.lgamma(0.8 * k + 4.0) > k * math.log(plan.a) for k in m])
        assert math.lgamma(0.8 * (plan.k1 - 1) + 4.0) <= (plan.k1 - 1) * math.log(plan.a)

    def test_invalid_rule(self):
        with pytest.raises(ValueError):
            taylor_plan(1.0, MLParams(1, 1), k1_rule="last")

    def test_accepted_implies_invariants(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = MLParams(rng.uniform(0.2, 3.0), rng.uniform(0.1, 10.0))
            plan = taylor_plan(rng.uniform(0, 30), p)
            if plan.accepted:
                assert plan.matrix_norm <= plan.norm_max
                assert plan.k1 is not None and plan.k1 <= plan.k2
                assert plan.m_max >= 1

    @settings(max_examples=80, deadline=None)
    @given(
        st.floats(0.2, 3.0),
        st.floats(0.1, 10.0),
        st.floats(0.0, 30.0),
        st.floats(0.0, 1.0),
    )
    def test_monotone_in_norm(self, alpha, beta, x, frac):
        p = MLParams(alpha, beta)
        if taylor_plan(x, p).accepted:
            assert taylor_plan(frac * x, p).accepted

    def test_as_dict(self):
        d = taylor_plan(1.0, MLParams(1, 1)).as_dict()
        assert d["k1"] == 4 and d["accepted"] is True


class TestBounds:
    def test_min_terms_examples(self):
        assert min_terms_prop1(0.5, MLParams(1, 1), 1e-15) == 52
        assert min_terms_prop1(0.1, MLParams(2, 3), 1e-15) == 17

    def test_min_terms_norm_too_large(self):
        with pytest.raises(NormTooLarge):
            min_terms_prop1(1.0, MLParams(1, 1))

    def test_min_terms_guarantee(self):
        p = MLParams(1.0, 1.0)
        m = min_terms_prop1(0.5, p, 1e-15)
        tail = sum(0.5**k / math.factorial(k) for k in range(m + 1, m + 60))
        assert tail <= 1e-15

    def test_geometric_tail_bound(self):
        assert truncation_bound_prop2(0.5, 1e-16) == pytest.approx(1e-16)
        assert truncation_bound_prop2(0.9, 1e-10) == pytest.approx(9e-10)
        assert truncation_bound_prop2(1e-300, 1.0) == pytest.approx(0.0, abs=1e-299)
        with pytest.raises(NormTooLarge):
            truncation_bound_prop2(1.5, 1.0)

    def test_ratio_tail_bound(self):
        assert truncation_bound_prop3(0.5, 50) == pytest.approx(2.0**-50, rel=1e-15)
        # b^(m+1) / (1 - b) at m = 0 is b / (1 - b) = 1
        assert truncation_bound_prop3(0.5, 0) == 1.0
        with pytest.raises(InvalidRatio):
            truncation_bound_prop3(1.0, 3)


class TestPatersonStockmeyer:
    @pytest.mark.parametrize("d,expected", [(1, 0), (2, 1), (4, 2), (9, 4), (10, 5), (50, 13)])
    def test_multiplication_count(self, d, expected):
        _, nm = paterson_stockmeyer(np.ones(d + 1), np.eye(3))
        assert nm == expected

    def test_cost_formula(self):
        for d in range(1, 80):
            s = math.ceil(math.sqrt(d))
            r = d // s
            phi = 1 if d % s == 0 else 0
            _, nm = paterson_stockmeyer(np.ones(d + 1), np.eye(2))
            assert nm == s - 1 + r - phi

    def test_degree_zero(self):
        P, nm = paterson_stockmeyer(np.array([2.5]), np.ones((2, 2)))
        np.testing.assert_array_equal(P, 2.5 * np.eye(2))
        assert nm == 0

    def test_matches_horner(self, rng):
        for d in (1, 3, 7, 16, 29, 50):
            A = random_complex(rng, (8, 8), 0.2)
            c = rng.standard_normal(d + 1)
            P, _ = paterson_stockmeyer(c, A)
            H = horner(c, A)
            assert np.linalg.norm(P - H) <= 1e-13 * np.linalg.norm(H)

    def test_zero_matrix(self):
        F = taylor_eval_ps(np.zeros((3, 3)), MLParams(0.9, 2.5), 50)
        np.testing.assert_allclose(F, np.eye(3) / gamma(2.5), rtol=1e-15)

    def test_counter_exposed(self):
        _, nm = taylor_eval_ps(np.eye(2), MLParams(1, 1), 50, return_mults=True)
        assert nm == 13

    def test_1x1_matches_scalar(self):
        for z in (0.3, -1.2 + 0.5j, 2j):
            p = MLParams(0.9, 1.4)
            F = taylor_eval_ps(np.array([[z]]), p, 50)
            assert abs(F[0, 0] - ml_scalar_taylor(z, p)) <= 1e-14 * max(1, abs(F[0, 0]))

    def test_gamma_overflow(self):
        with pytest.raises(GammaOverflow):
            series_coefficients(MLParams(5.0, 1.0), 40)

    def test_commutes(self, rng):
        A = random_complex(rng, (10, 10), 0.3)
        F = taylor_eval_ps(A, MLParams(0.8, 1.7), 50)
        res = np.linalg.norm(F @ A - A @ F)
        assert res <= 1e-12 * np.linalg.norm(F) * np.linalg.norm(A)

    def test_coefficients_exact(self):
        c = series_coefficients(MLParams(1, 1), 10)
        np.testing.assert_allclose(c, [1 / math.factorial(k) for k in range(11)], rtol=1e-14)


def series_tail(A, params, start, stop):
    """``sum_{k=start}^{stop-1} A^k / Gamma(alpha k + beta)``, the part a
    degree ``start - 1`` polynomial omits from a *stop*-term reference."""
    n = A.shape[0]
    P = np.linalg.matrix_power(A, start)
    tail = np.zeros((n, n), dtype=complex)
    for k in range(start, stop):
        tail += P * math.exp(-math.lgamma(params.alpha * k + params.beta))
        P = P @ A
    return tail


class TestTruncationBound:
    def test_ratio_tail_bound_holds(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 30:
            n = int(rng.integers(1, 9))
            A = random_complex(rng, (n, n), rng.uniform(0.05, 1.0))
            p = MLParams(rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.0))
            plan = taylor_plan(np.linalg.norm(A, 2), p)
            if not plan.accepted:
                continue
            err = np.linalg.norm(series_tail(A, p, plan.degree + 1, 4 * plan.k2), 2)
            assert err <= 10 * truncation_bound_prop3(0.5, plan.k2)
            checked += 1
