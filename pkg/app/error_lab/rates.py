"""
Log-log regression of errors against truncation levels.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MINIMUM_LEVELS = 3


@dataclass(frozen=True)
class RateFit:
    levels: Tuple[int, ...]
    errors: Tuple[float, ...]
    slope: float
    intercept: float
    residual: float

    def predict(self, n: float) -> float:
        return math.exp(self.intercept) * n**self.slope


def fit_rate(levels: Sequence[int], errors: Sequence[float]) -> RateFit:
    """
    Least-squares slope of log(error) against log(n).

    Args:
        levels: Truncation levels.
        errors: Error estimates, one per level.

    Returns:
        RateFit over the strictly positive errors; `residual` is the RMS of the
        log residuals.

    Raises:
        ConfigurationError: If the inputs differ in length or fewer than three
            positive errors remain.
    """
    if len(levels) != len(errors):
        raise ConfigurationError(f"Got {len(levels)} levels but {len(errors)} errors")
    kept = [(int(n), float(e)) for n, e in zip(levels, errors) if e > 0 and math.isfinite(e)]
    dropped = len(levels) - len(kept)
    if dropped:
        logger.warning(f"Dropped {dropped} nonpositive or non-finite errors from the rate fit")
    if len(kept) < MINIMUM_LEVELS:
        raise ConfigurationError(
            f"A rate fit needs at least {MINIMUM_LEVELS} positive errors, got {len(kept)}"
        )
    kept_levels, kept_errors = zip(*kept)
    x = np.log(np.asarray(kept_levels, dtype=float))
    y = np.log(np.asarray(kept_errors))
    result = linregress(x, y)
    residual = float(np.sqrt(np.mean((y - (result.intercept + result.slope * x)) ** 2)))
    return RateFit(
        levels=tuple(kept_levels),
        errors=tuple(kept_errors),
        slope=float(result.slope),
        intercept=float(result.intercept),
        residual=residual,
    )
