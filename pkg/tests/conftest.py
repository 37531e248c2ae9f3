from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest


def mp_ml(z, alpha, beta, dps=40, terms=None):
    """High-precision series value of E_{alpha,beta}(z) with exact mpf parameters."""
    with mp.workdps(dps):
        a, b = mp.mpf(alpha), mp.mpf(beta)
        zz = mp.mpc(z)
        total = mp.mpf(0)
        k = 0
        while True:
            term = zz**k / mp.gamma(a * k + b)
            total += term
            k += 1
            if terms is not None and k >= terms:
                break
            if terms is None and k > 20 and abs(term) < mp.mpf(10) ** (-dps) * max(1, abs(total)):
                break
        return complex(total)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_triangular(rng, n, diag_scale=1.0, upper_scale=1.0):
    T = np.triu(random_complex(rng, (n, n), upper_scale), 1)
    T[np.diag_indices(n)] = random_complex(rng, n, diag_scale)
    return T


def relerr(x, ref):
    return float(np.linalg.norm(np.asarray(x) - np.asarray(ref)) / np.linalg.norm(ref))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
