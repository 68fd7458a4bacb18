"""
Drift coefficient families.

A drift acts on the coefficient vector of one field (the wave position, the
Schroedinger wave function, an HJMM curve) and returns the coefficients of the
drift field. Equations decide where the result lands in their state.
Every class here is a plain picklable object so specs can cross process
boundaries.
"""

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from app.spectral.bases import CollocationGrid
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class SineNonlinearity:
    """f(s, x) = amplitude * sin(frequency * x)."""

    def __init__(self, amplitude: float = 1.0, frequency: float = 1.0):
        self.amplitude = amplitude
        self.frequency = frequency

    def __call__(self, points: np.ndarray, values: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(self.frequency * values)

    @property
    def first_derivative_bound(self) -> float:
        return abs(self.amplitude * self.frequency)

    @property
    def second_derivative_bound(self) -> float:
        return abs(self.amplitude) * self.frequency**2

    def __repr__(self):
        return f"SineNonlinearity(amplitude={self.amplitude}, frequency={self.frequency})"


class TanhNonlinearity:
    """f(s, x) = amplitude * tanh(x)."""

    # max |tanh''| = max 2 sech^2 tanh, attained at tanh^2 = 1/3
    SECOND_DERIVATIVE_MAX = 4.0 / (3.0 * math.sqrt(3.0))

    def __init__(self, amplitude: float = 1.0):
        self.amplitude = amplitude

    def __call__(self, points: np.ndarray, values: np.ndarray) -> np.ndarray:
        return self.amplitude * np.tanh(values)

    @property
    def first_derivative_bound(self) -> float:
        return abs(self.amplitude)

    @property
    def second_derivative_bound(self) -> float:
        return abs(self.amplitude) * self.SECOND_DERIVATIVE_MAX

    def __repr__(self):
        return f"TanhNonlinearity(amplitude={self.amplitude})"


NONLINEARITIES = {
    "sine": SineNonlinearity,
    "tanh": TanhNonlinearity,
}


class ZeroDrift:
    def __call__(self, u: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        return np.zeros_like(u)

    @property
    def is_zero(self) -> bool:
        return True

    def __repr__(self):
        return "ZeroDrift()"


class AffineDrift:
    """
    F(u) = f0 + f1 * u.

    f1 is a scalar (exact in coefficient space) or a field given by its
    coefficients, in which case the product is taken on the collocation grid.
    """

    def __init__(
        self,
        f0: np.ndarray,
        f1: Union[float, np.ndarray] = 0.0,
        grid: Optional[CollocationGrid] = None,
    ):
        self.f0 = np.asarray(f0, dtype=float)
        self.grid = grid
        if np.ndim(f1) == 0:
            self.f1 = float(f1)
            self._f1_values = None
        else:
            if grid is None:
                raise ConfigurationError("A field-valued f1 needs a collocation grid")
            self.f1 = np.asarray(f1, dtype=float)
            self._f1_values = grid.synthesize(self.f1)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.f0) and not np.any(self.f1)

    @property
    def linear_bound(self) -> float:
        """Bound on the multiplier |f1| (sup norm on the grid for field-valued f1)."""
        if self._f1_values is None:
            return abs(self.f1)
        return float(np.max(np.abs(self._f1_values)))

    def __call__(self, u: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        if self._f1_values is None:
            return self.f0 + self.f1 * u
        return self.f0 + self.grid.analyze(self._f1_values * self.grid.synthesize(u))

    def __repr__(self):
        return f"AffineDrift(|f0|={np.linalg.norm(self.f0):.4g}, f1_bound={self.linear_bound:.4g})"


class NemytskiiDrift:
    """F(u)(s) = f(s, u(s)): synthesize, apply f pointwise, analyze."""

    def __init__(self, nonlinearity, grid: CollocationGrid):
        self.nonlinearity = nonlinearity
        self.grid = grid

    @property
    def is_zero(self) -> bool:
        return False

    def __call__(self, u: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        values = self.grid.synthesize(u)
        return self.grid.analyze(self.nonlinearity(self.grid.points, values))

    def __repr__(self):
        return f"NemytskiiDrift({self.nonlinearity!r}, grid={self.grid.size})"


class NoArbitrageDrift:
    """
    HJM drift trace(m(BP_n, BP_n))(tau) = sum_{k<n} (Be_k)(tau) * int_0^tau (Be_k)(s) ds.

    The curves live on a uniform maturity grid; the inner integral is the
    cumulative trapezoid rule. With mode "full" the noise truncation is ignored
    and every row contributes.
    """

    MODES = ("truncated", "full")

    def __init__(self, rows: np.ndarray, spacing: float, mode: str = "truncated"):
        if mode not in self.MODES:
            raise ConfigurationError(f"Unknown drift mode '{mode}', expected one of {self.MODES}")
        self.rows = np.atleast_2d(np.asarray(rows, dtype=float))
        self.spacing = spacing
        self.mode = mode
        integrals = cumulative_trapezoid(self.rows, dx=spacing, axis=1, initial=0.0)
        # terms[k] is the contribution of row k; partial sums give every level
        self._partial_sums = np.cumsum(self.rows * integrals, axis=0)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.rows)

    def curve(self, n: Optional[int] = None) -> np.ndarray:
        """Drift curve keeping the first n rows (all rows when n is None)."""
        count = self.rows.shape[0] if n is None else min(n, self.rows.shape[0])
        if count == 0:
            return np.zeros(self.rows.shape[1])
        return self._partial_sums[count - 1]

    def __call__(self, u: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        return self.curve(None if self.mode == "full" else n)

    def __repr__(self):
        return f"NoArbitrageDrift(rows={self.rows.shape[0]}, mode={self.mode})"
