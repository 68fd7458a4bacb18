"""
Closed-form weak error of the diagonal model with phi = exp(-||.||^2/2).

With X^n_1 = sum_{k<n} lambda_k beta_k(1) f_k the coordinates are independent
N(0, lambda_k^2), and E exp(-Z^2/2) = (1 + lambda^2)^{-1/2}, so

    E phi(X^n_1) = exp(-1/2 sum_{k<n} log(1 + lambda_k^2)).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.utils.errors import DomainError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SUMMATION_CUTOFF = 10_000
REMAINDER_TOLERANCE = 1e-12
MAX_CUTOFF = 10**7


@dataclass(frozen=True)
class SharpnessRow:
    n: int
    phi_mean: float
    tail: float
    strong_ratio: Optional[float]
    weak_ratio: Optional[float]


def _check_summable(lambdas):
    total = lambdas.tail_sq(0)
    if not math.isfinite(total):
        raise DomainError(f"Sum of lambda_k^2 diverges for {lambdas!r}")


def _log_sum(lambdas, start: int, stop: int) -> float:
    if stop <= start:
        return 0.0
    values = lambdas.values(stop)[start:]
    return math.fsum(np.log1p(values**2))


def _log_remainder(lambdas, start: int) -> Optional[float]:
    """
    sum_{k >= start} log(1 + lambda_k^2) from the alternating series
    x - x^2/2 + x^3/3, whose error is at most sum x^4 / 4. None when that
    error is above tolerance.
    """
    if lambdas.length <= start:
        return 0.0
    if math.isfinite(lambdas.length):
        return _log_sum(lambdas, start, int(lambdas.length))
    error = lambdas.power_sum(start, 4.0) / 4.0
    if error > REMAINDER_TOLERANCE:
        return None
    return lambdas.tail_sq(start) - lambdas.power_sum(start, 2.0) / 2.0 + lambdas.power_sum(start, 3.0) / 3.0


def log_tail(lambdas, n: int, cutoff: int = SUMMATION_CUTOFF) -> float:
    """sum_{k>=n} log(1 + lambda_k^2) to within 1e-12."""
    _check_summable(lambdas)
    start = max(n, 0)
    while True:
        split = max(start, cutoff)
        remainder = _log_remainder(lambdas, split)
        if remainder is not None:
            return _log_sum(lambdas, start, split) + remainder
        if cutoff >= MAX_CUTOFF:
            raise DomainError(f"Cannot control the log remainder of {lambdas!r} below {REMAINDER_TOLERANCE}")
        cutoff *= 10


def gaussian_oracle(lambdas, n: Optional[float] = None) -> float:
    """
    E phi(X^n_1); n=None or math.inf gives the untruncated value.

    Raises:
        DomainError: If the declared sum of lambda_k^2 diverges.
    """
    _check_summable(lambdas)
    if n is None or n == math.inf:
        return math.exp(-0.5 * log_tail(lambdas, 0))
    if n < 0:
        raise DomainError(f"Level must be nonnegative, got {n}")
    return math.exp(-0.5 * _log_sum(lambdas, 0, int(n)))


def weak_ratio(lambdas, n: int) -> Optional[float]:
    """
    (E phi(X^n) - E phi(X^inf)) / sum_{k>=n} lambda_k^2, or None for an empty tail.
    """
    tail = lambdas.tail_sq(n)
    if tail <= 0:
        return None
    # E phi(X^n) - E phi(X^inf) = E phi(X^n) (1 - exp(-R_n / 2))
    difference = -gaussian_oracle(lambdas, n) * math.expm1(-0.5 * log_tail(lambdas, n))
    return difference / tail


def sharpness_ratios(lambdas, levels: Sequence[int], report=None) -> List[SharpnessRow]:
    """
    Strong and weak sharpness ratios per level.

    Without a report the strong ratio is 1 by construction. With an
    ErrorReport of the diagonal model it is the simulated strong_sq divided by
    the coupled tail sum_{n <= k < n_ref} lambda_k^2.
    """
    _check_summable(lambdas)
    estimates = {row.n: row for row in report.rows} if report is not None else {}
    rows = []
    for n in levels:
        tail = lambdas.tail_sq(n)
        strong = 1.0 if tail > 0 else None
        if report is not None:
            coupled = tail - lambdas.tail_sq(report.n_ref)
            row = estimates.get(n)
            strong = row.strong_sq / coupled if row is not None and coupled > 0 else None
        rows.append(SharpnessRow(n, gaussian_oracle(lambdas, n), tail, strong, weak_ratio(lambdas, n)))
    return rows
