"""
Singular-value families lambda_0 >= lambda_1 >= ... of an additive noise B.
"""

import logging
from typing import Sequence

import numpy as np
from scipy.special import zeta

from app.utils.errors import DomainError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class PowerLawLambdas:
    """lambda_k = (k + 1)^(-q), k >= 0; square-summable iff q > 1/2."""

    def __init__(self, q: float):
        if q <= 0.5:
            raise DomainError(f"Power law exponent q must exceed 1/2 for sum lambda_k^2 < inf, got {q}")
        self.q = q

    @property
    def length(self) -> float:
        return float("inf")

    def values(self, count: int) -> np.ndarray:
        return (np.arange(count) + 1.0) ** (-self.q)

    def power_sum(self, n: int, power: float = 1.0) -> float:
        """sum_{k>=n} lambda_k^(2 power) via the Hurwitz zeta function."""
        return float(zeta(2.0 * self.q * power, n + 1))

    def tail_sq(self, n: int) -> float:
        return self.power_sum(n, 1.0)

    def __repr__(self):
        return f"PowerLawLambdas(q={self.q})"


class ExplicitLambdas:
    """Finitely many lambdas; everything past the list is zero."""

    def __init__(self, values: Sequence[float]):
        array = np.asarray(values, dtype=float)
        if array.ndim != 1 or np.any(~np.isfinite(array)):
            raise DomainError("Explicit lambdas must be a finite 1-d list")
        self._values = array

    @property
    def length(self) -> float:
        return float(self._values.size)

    def values(self, count: int) -> np.ndarray:
        result = np.zeros(count)
        used = min(count, self._values.size)
        result[:used] = self._values[:used]
        return result

    def power_sum(self, n: int, power: float = 1.0) -> float:
        return float(np.sum(np.abs(self._values[n:]) ** (2.0 * power)))

    def tail_sq(self, n: int) -> float:
        return self.power_sum(n, 1.0)

    def __repr__(self):
        return f"ExplicitLambdas({self._values.size} values)"
