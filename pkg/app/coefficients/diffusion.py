"""
Diffusion coefficient families and their tail-ratio bounds.

A diffusion maps the driving field u of the state and a row of Brownian
increments to the coefficients of sum_{k<n} B(u) e_k dW_k. Column k of the
increment row always drives the k-th basis element of U (first-n convention).
"""

import logging
import math
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import zeta

from app.spectral.bases import Basis, BasisKind, CollocationGrid
from app.spectral.operators import InterpolationSpaceNorm
from app.utils.errors import ConfigurationError, DomainError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

Profile = Union[float, Callable[[np.ndarray], np.ndarray]]


class SineModeProfile:
    """amplitude * sqrt(2) sin(mode pi s) on (0, 1)."""

    def __init__(self, amplitude: float, mode: int = 1):
        self.amplitude = amplitude
        self.mode = mode

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.amplitude * math.sqrt(2.0) * np.sin(self.mode * math.pi * np.asarray(points))

    def __repr__(self):
        return f"SineModeProfile(amplitude={self.amplitude}, mode={self.mode})"


class GaussianProfile:
    """amplitude * exp(-x^2 / (2 width^2)) on the torus."""

    def __init__(self, amplitude: float, width: float = 1.0):
        self.amplitude = amplitude
        self.width = width

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points)
        return self.amplitude * np.exp(-(points**2) / (2.0 * self.width**2))

    def __repr__(self):
        return f"GaussianProfile(amplitude={self.amplitude}, width={self.width})"


class PowerLawTail:
    """Tail bound constant * n ** exponent."""

    def __init__(self, constant: float, exponent: float):
        self.constant = constant
        self.exponent = exponent

    def __call__(self, n: int) -> float:
        return self.constant * float(n) ** self.exponent

    def __repr__(self):
        return f"PowerLawTail({self.constant:.6g} * n^{self.exponent:.4g})"


class HurwitzTail:
    """factor * sum_{k>=n} (k + offset)^(-power) = factor * zeta(power, n + offset)."""

    def __init__(self, factor: float, power: float, offset: int = 1):
        if power <= 1:
            raise DomainError(f"Tail series diverges for power {power} <= 1")
        self.factor = factor
        self.power = power
        self.offset = offset

    def __call__(self, n: int) -> float:
        return self.factor * float(zeta(self.power, n + self.offset))

    def __repr__(self):
        return f"HurwitzTail({self.factor:.6g} * zeta({self.power:.4g}, n + {self.offset}))"


class ColumnSumTail:
    """Tail bound factor * (sum_{k>=n} column_sq[k] + remainder)."""

    def __init__(self, column_sq: np.ndarray, remainder: float = 0.0, factor: float = 1.0):
        self.column_sq = np.asarray(column_sq, dtype=float)
        # suffix[n] = sum_{k>=n} column_sq[k]
        self._suffix = np.concatenate([np.cumsum(self.column_sq[::-1])[::-1], [0.0]])
        self.remainder = remainder
        self.factor = factor

    def __call__(self, n: int) -> float:
        return self.factor * (float(self._suffix[min(n, self.column_sq.size)]) + self.remainder)

    def __repr__(self):
        return f"ColumnSumTail(columns={self.column_sq.size}, factor={self.factor:.6g})"


class ConstantDiffusion:
    """
    Additive noise: B(u) e_k = row_k for every u.

    Either dense rows (row k holds the coefficients of Be_k) or a diagonal
    action Be_k = lambda_k f_k. Columns past the declared ones act as zero in the
    simulation; their analytic mass is declared as `tail_remainder`.
    """

    def __init__(
        self,
        rows: Optional[np.ndarray] = None,
        diagonal: Optional[np.ndarray] = None,
        output_size: Optional[int] = None,
        norm_weights: Optional[np.ndarray] = None,
        tail_remainder: float = 0.0,
        norm=None,
    ):
        if (rows is None) == (diagonal is None):
            raise ConfigurationError("Constant diffusion needs exactly one of rows or diagonal")
        if rows is not None:
            self.rows = np.atleast_2d(np.asarray(rows, dtype=float))
            self.diagonal = None
            size = self.rows.shape[1]
        else:
            self.rows = None
            self.diagonal = np.asarray(diagonal, dtype=float)
            size = output_size if output_size is not None else self.diagonal.size
            if size < self.diagonal.size:
                raise ConfigurationError(
                    f"Diagonal of {self.diagonal.size} entries does not fit {size} modes"
                )
        self.output_size = size
        self.norm_weights = np.ones(size) if norm_weights is None else np.asarray(norm_weights)
        self.norm = norm
        if not math.isfinite(tail_remainder) or tail_remainder < 0:
            raise ConfigurationError(f"Declared tail must be finite and nonnegative, got {tail_remainder}")
        self.tail_remainder = tail_remainder
        declared = self._declared_columns_sq()
        if not np.all(np.isfinite(declared)):
            raise ConfigurationError("Constant diffusion rows must have finite norms")
        self._declared = declared
        self._tail = ColumnSumTail(declared, tail_remainder)

    @classmethod
    def from_diagonal(cls, lambdas: np.ndarray, **kwargs) -> "ConstantDiffusion":
        return cls(diagonal=lambdas, **kwargs)

    @property
    def column_count(self) -> int:
        return self.rows.shape[0] if self.rows is not None else self.diagonal.size

    @property
    def is_zero(self) -> bool:
        values = self.rows if self.rows is not None else self.diagonal
        return not np.any(values) and self.tail_remainder == 0

    def _declared_columns_sq(self) -> np.ndarray:
        if self.rows is not None and self.norm is not None:
            return np.array([self.norm.norm_sq(row) for row in self.rows])
        if self.rows is not None:
            return (self.rows**2) @ self.norm_weights
        return self.diagonal**2 * self.norm_weights[: self.diagonal.size]

    def apply(self, u: np.ndarray, increments: np.ndarray, n: int) -> np.ndarray:
        count = min(n, self.column_count)
        if self.rows is not None:
            return self.rows[:count].T @ increments[:count]
        result = np.zeros(self.output_size)
        result[:count] = self.diagonal[:count] * increments[:count]
        return result

    def column_norms_sq(self, u: np.ndarray, count: int) -> np.ndarray:
        values = np.zeros(count)
        used = min(count, self._declared.size)
        values[:used] = self._declared[:used]
        return values

    def tail(self, n: int) -> float:
        """Exact sum_{k>=n} ||Be_k||^2_H, including the declared remainder."""
        return self._tail(n)

    def tail_ratio_bound(self, space: Optional[InterpolationSpaceNorm], n: int) -> Optional[float]:
        return self.tail(n)

    def __repr__(self):
        kind = "rows" if self.rows is not None else "diagonal"
        return f"ConstantDiffusion({kind}, columns={self.column_count})"


class RankOneIntegralDiffusion:
    """
    (B(x)u)(s) = int_0^1 x(r) u(r) dr, so B(x) e_k = <x, e_k> 1.

    The simulation uses the projection of 1 onto the basis; column norms use
    the exact ||1||_H = 1, which gives sum_k ||B(x)e_k||^2 = ||x||^2_H.
    """

    UNIT_NORM_SQ = 1.0

    def __init__(self, basis: Basis):
        if basis.kind is not BasisKind.DIRICHLET_SINE:
            raise ConfigurationError("The rank-one integral coefficient lives on the sine basis")
        self.basis = basis
        self._one = basis.constant_one()

    @property
    def is_zero(self) -> bool:
        return False

    def apply(self, u: np.ndarray, increments: np.ndarray, n: int) -> np.ndarray:
        count = min(n, self.basis.size)
        return float(u[:count] @ increments[:count]) * self._one

    def column_norms_sq(self, u: np.ndarray, count: int) -> np.ndarray:
        values = np.zeros(count)
        used = min(count, u.size)
        values[:used] = u[:used] ** 2 * self.UNIT_NORM_SQ
        return values

    def tail_ratio_bound(self, space: Optional[InterpolationSpaceNorm], n: int) -> Optional[float]:
        """1 on V = H; (theta pi^2 n^2)^(-2 delta) on V = dom((-A)^delta)."""
        if space is None or space.exponent == 0:
            return 1.0
        delta = space.exponent
        if delta < 0:
            return None
        first_eigenvalue = space.operator.eigenvalues[0]
        # mu_n = mu_1 n^2 on the Dirichlet Laplacian
        return float((first_eigenvalue * n**2) ** (-2.0 * delta))

    def __repr__(self):
        return f"RankOneIntegralDiffusion(modes={self.basis.size})"


class PointwiseAffineDiffusion:
    """
    B(u) w = (b0 + b1 u) * (Sigma w), products by collocation.

    Sigma acts diagonally on the noise basis (identity when `sigma` is None).
    With complex noise, columns 2m and 2m+1 drive the real and imaginary unit of
    mode m. The product falls back to coefficient space when b1 = 0 and b0 is a
    constant, which needs no grid.
    """

    def __init__(
        self,
        basis: Basis,
        b0: Profile = 0.0,
        b1: Profile = 0.0,
        grid: Optional[CollocationGrid] = None,
        sigma: Optional[np.ndarray] = None,
        complex_noise: bool = False,
        norm_weights: Optional[np.ndarray] = None,
        tail_model: Optional[Callable[[int], float]] = None,
    ):
        self.basis = basis
        self.b0 = b0
        self.b1 = b1
        self.grid = grid
        self.sigma = np.ones(basis.size) if sigma is None else np.asarray(sigma, dtype=float)
        if self.sigma.shape != (basis.size,):
            raise ConfigurationError(f"Sigma needs {basis.size} entries, got {self.sigma.shape}")
        self.complex_noise = complex_noise
        self.norm_weights = np.ones(basis.size) if norm_weights is None else np.asarray(norm_weights)
        self.tail_model = tail_model
        self.coefficient_space = np.ndim(b0) == 0 and np.ndim(b1) == 0 and b1 == 0
        if not self.coefficient_space:
            if grid is None:
                raise ConfigurationError(
                    "Pointwise diffusion with nonzero b1 or a non-constant b0 needs a collocation grid"
                )
            self._b0_values = self._sample(b0)
            self._b1_values = self._sample(b1)

    def _sample(self, profile: Profile) -> np.ndarray:
        if np.ndim(profile) == 0:
            return np.full(self.grid.size, float(profile))
        return np.asarray(profile(self.grid.points), dtype=float)

    @property
    def noise_columns(self) -> int:
        return self.basis.size * (2 if self.complex_noise else 1)

    @property
    def is_zero(self) -> bool:
        if self.coefficient_space:
            return self.b0 == 0
        return not np.any(self._b0_values) and not np.any(self._b1_values)

    def sup_b1(self) -> float:
        if np.ndim(self.b1) == 0:
            return abs(float(self.b1))
        return float(np.max(np.abs(self._b1_values)))

    def noise_field(self, increments: np.ndarray, n: int) -> np.ndarray:
        """Coefficients of Sigma P_n dW (complex when the noise is complex)."""
        count = min(n, self.noise_columns)
        padded = np.zeros(self.noise_columns)
        padded[:count] = increments[:count]
        if self.complex_noise:
            return self.sigma * (padded[0::2] + 1j * padded[1::2])
        return self.sigma * padded

    def multiplier(self, u: np.ndarray) -> np.ndarray:
        """Grid values of b0 + b1 u."""
        return self._b0_values + self._b1_values * self.grid.synthesize(u)

    def apply(self, u: np.ndarray, increments: np.ndarray, n: int) -> np.ndarray:
        noise = self.noise_field(increments, n)
        if self.coefficient_space:
            return float(self.b0) * noise
        return self.grid.analyze(self.multiplier(u) * self.grid.synthesize(noise))

    def column_norms_sq(
        self, u: np.ndarray, count: int, weights: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """||B(u) e_k||^2 for the first `count` noise columns, in H unless other `weights` are given."""
        weights = self.norm_weights if weights is None else np.asarray(weights)
        values = np.zeros(count)
        used = min(count, self.noise_columns)
        modes = np.arange(used) // 2 if self.complex_noise else np.arange(used)
        if self.coefficient_space:
            values[:used] = float(self.b0) ** 2 * self.sigma[modes] ** 2 * weights[modes]
            return values
        mode_count = int(modes.max()) + 1 if used else 0
        columns = self.grid.synthesis_matrix[:, :mode_count] * self.sigma[:mode_count]
        images = self.grid.analyze(self.multiplier(u)[:, None] * columns)
        per_mode = weights @ np.abs(images) ** 2
        values[:used] = per_mode[modes]
        return values

    def tail_ratio_bound(self, space: Optional[InterpolationSpaceNorm], n: int) -> Optional[float]:
        if self.tail_model is None:
            return None
        return self.tail_model(n)

    def __repr__(self):
        return (
            f"PointwiseAffineDiffusion(b0={self.b0!r}, b1={self.b1!r}, "
            f"complex_noise={self.complex_noise}, grid={'none' if self.grid is None else self.grid.size})"
        )


def apply_diffusion(coefficient, u: np.ndarray, increments: np.ndarray, n: int) -> np.ndarray:
    """
    Evaluate sum_{k<n} B(u) e_k dW_k.

    Raises:
        DomainError: If fewer than n increments are available.
    """
    if n > np.shape(increments)[-1]:
        raise DomainError(f"Level {n} needs {n} increments, got {np.shape(increments)[-1]}")
    return coefficient.apply(u, increments, n)


def column_norms_sq(coefficient, u: np.ndarray, count: int) -> np.ndarray:
    return coefficient.column_norms_sq(u, count)


def tail_ratio_bound(
    coefficient, space: Optional[InterpolationSpaceNorm], n: int
) -> Optional[float]:
    """sup over V of sum_{k>=n} ||B(x)e_k||^2_H / (1 + ||x||^2_V), or None when unavailable."""
    if n < 1:
        raise DomainError(f"Level must be positive, got {n}")
    return coefficient.tail_ratio_bound(space, n)
