from __future__ import annotations

import math
from dataclasses import dataclass

#: largest argument for which Gamma is finite in double precision
GAMMA_ARG_MAX = 171.624


@dataclass(frozen=True)
class MLParams:
    """Parameters ``(alpha, beta)`` of the Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def m_max(self) -> int:
        """Number of series terms before ``Gamma(alpha * m + beta)`` overflows."""
        return math.floor((GAMMA_ARG_MAX - self.beta) / self.alpha)
