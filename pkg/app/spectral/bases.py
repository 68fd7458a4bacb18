"""
Orthonormal bases, collocation grids and exact product rules.

Two bases diagonalize every operator the lab uses:

- Dirichlet sine on (0, 1): e_k(s) = sqrt(2) sin(k pi s), k = 1..N.
- Fourier on the torus [-L, L): the constant mode followed by (cos, sin)
  pairs with wavenumbers xi_j = j pi / L, j = 1..J, so N = 2J + 1.

A third, canonical basis stands for plain sequence space (no functions, no grid).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_HALF_LENGTH = 32.0
DEALIASING_FACTOR = 4


class BasisKind(Enum):
    DIRICHLET_SINE = "dirichlet_sine"
    FOURIER_TORUS = "fourier_torus"
    CANONICAL = "canonical"


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis with a contiguous range of modes.

    Args:
        kind: Which family of eigenfunctions.
        size: Number of real modes (2J + 1 for the torus).
        half_length: Torus half-length L; ignored by the other kinds.
    """

    kind: BasisKind
    size: int
    half_length: float = DEFAULT_HALF_LENGTH

    def __post_init__(self):
        if self.size < 1:
            raise ConfigurationError(f"Basis needs at least one mode, got {self.size}")
        if self.kind is BasisKind.FOURIER_TORUS:
            if self.size % 2 != 1:
                raise ConfigurationError(
                    f"Fourier torus basis has 2J+1 modes, got even size {self.size}"
                )
            if self.half_length <= 0:
                raise ConfigurationError(
                    f"Torus half-length must be positive, got {self.half_length}"
                )

    @classmethod
    def dirichlet_sine(cls, size: int) -> "Basis":
        return cls(BasisKind.DIRICHLET_SINE, size)

    @classmethod
    def fourier_torus(
        cls, cutoff: int, half_length: float = DEFAULT_HALF_LENGTH
    ) -> "Basis":
        """Torus basis with wavenumbers up to cutoff * pi / half_length."""
        return cls(BasisKind.FOURIER_TORUS, 2 * cutoff + 1, half_length)

    @classmethod
    def canonical(cls, size: int) -> "Basis":
        return cls(BasisKind.CANONICAL, size)

    @property
    def cutoff(self) -> int:
        if self.kind is BasisKind.FOURIER_TORUS:
            return (self.size - 1) // 2
        return self.size

    @property
    def mode_numbers(self) -> np.ndarray:
        """Integer label of each mode: k for sine, j for torus (cos_j and sin_j share j)."""
        if self.kind is BasisKind.DIRICHLET_SINE:
            return np.arange(1, self.size + 1)
        if self.kind is BasisKind.FOURIER_TORUS:
            return (np.arange(self.size) + 1) // 2
        return np.arange(self.size)

    @property
    def wavenumbers(self) -> np.ndarray:
        if self.kind is BasisKind.DIRICHLET_SINE:
            return math.pi * self.mode_numbers.astype(float)
        if self.kind is BasisKind.FOURIER_TORUS:
            return math.pi * self.mode_numbers.astype(float) / self.half_length
        return np.zeros(self.size)

    def sup_norms(self) -> np.ndarray:
        """Sup norm of every basis function."""
        if self.kind is BasisKind.DIRICHLET_SINE:
            return np.full(self.size, math.sqrt(2.0))
        if self.kind is BasisKind.FOURIER_TORUS:
            values = np.full(self.size, 1.0 / math.sqrt(self.half_length))
            values[0] = 1.0 / math.sqrt(2.0 * self.half_length)
            return values
        return np.ones(self.size)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Matrix of basis functions, shape (len(points), size)."""
        points = np.asarray(points, dtype=float)
        if self.kind is BasisKind.DIRICHLET_SINE:
            return math.sqrt(2.0) * np.sin(np.outer(points, self.wavenumbers))
        if self.kind is BasisKind.FOURIER_TORUS:
            phases = np.outer(points, self.wavenumbers)
            values = np.empty_like(phases)
            values[:, 0] = 1.0 / math.sqrt(2.0 * self.half_length)
            scale = 1.0 / math.sqrt(self.half_length)
            values[:, 1::2] = scale * np.cos(phases[:, 1::2])
            values[:, 2::2] = scale * np.sin(phases[:, 2::2])
            return values
        raise ConfigurationError("The canonical basis has no eigenfunctions to evaluate")

    def constant_one(self) -> np.ndarray:
        """Coefficients of the constant function 1 projected onto this basis."""
        if self.kind is BasisKind.DIRICHLET_SINE:
            k = self.mode_numbers
            # <1, sqrt(2) sin(k pi s)> = sqrt(2) (1 - cos k pi) / (k pi)
            return np.where(k % 2 == 1, 2.0 * math.sqrt(2.0) / (k * math.pi), 0.0)
        if self.kind is BasisKind.FOURIER_TORUS:
            values = np.zeros(self.size)
            values[0] = math.sqrt(2.0 * self.half_length)
            return values
        raise ConfigurationError("The canonical basis has no constant function")


def pairs_to_complex(pairs: np.ndarray) -> np.ndarray:
    """Interleaved (re, im) pairs -> complex vector."""
    pairs = np.asarray(pairs, dtype=float)
    return pairs[..., 0::2] + 1j * pairs[..., 1::2]


def complex_to_pairs(values: np.ndarray) -> np.ndarray:
    """Complex vector -> interleaved (re, im) pairs."""
    values = np.asarray(values)
    pairs = np.empty(values.shape[:-1] + (2 * values.shape[-1],))
    pairs[..., 0::2] = values.real
    pairs[..., 1::2] = values.imag
    return pairs


@dataclass(frozen=True)
class CollocationGrid:
    """Physical-space grid with exact discrete transforms for its basis.

    Synthesis evaluates a coefficient vector on the grid, analysis projects grid
    values back. Analysis after synthesis is the identity for every mode the
    grid resolves (G >= N for sine, G > 2J for the torus).
    """

    basis: Basis
    points: np.ndarray
    synthesis_matrix: np.ndarray = field(repr=False)
    analysis_matrix: np.ndarray = field(repr=False)

    @classmethod
    def for_basis(cls, basis: Basis, size: Optional[int] = None) -> "CollocationGrid":
        """
        Build the grid for a basis.

        Args:
            basis: Sine or torus basis.
            size: Number of grid points; defaults to DEALIASING_FACTOR * basis.size.

        Returns:
            Grid with precomputed transform matrices.

        Raises:
            ConfigurationError: If the basis has no grid or the grid under-resolves it.
        """
        grid_size = size if size is not None else DEALIASING_FACTOR * basis.size
        if basis.kind is BasisKind.DIRICHLET_SINE:
            if grid_size < basis.size:
                raise ConfigurationError(
                    f"Sine grid of {grid_size} points cannot resolve {basis.size} modes"
                )
            # DST-I interior points; sum_g e_j(s_g) e_k(s_g) = (G + 1) delta_jk
            points = np.arange(1, grid_size + 1) / (grid_size + 1)
            synthesis = basis.evaluate(points)
            analysis = synthesis.T / (grid_size + 1)
        elif basis.kind is BasisKind.FOURIER_TORUS:
            if grid_size <= 2 * basis.cutoff:
                raise ConfigurationError(
                    f"Torus grid of {grid_size} points cannot resolve cutoff {basis.cutoff}"
                )
            length = 2.0 * basis.half_length
            points = -basis.half_length + length * np.arange(grid_size) / grid_size
            synthesis = basis.evaluate(points)
            analysis = synthesis.T * (length / grid_size)
        else:
            raise ConfigurationError("The canonical basis has no collocation grid")
        synthesis.setflags(write=False)
        analysis.setflags(write=False)
        points.setflags(write=False)
        logger.debug(f"Built {basis.kind.value} grid with {grid_size} points")
        return cls(basis, points, synthesis, analysis)

    @property
    def size(self) -> int:
        return len(self.points)

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        """Grid values of a (real or complex) coefficient vector."""
        return self.synthesis_matrix @ coefficients

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of (real or complex) grid values."""
        return self.analysis_matrix @ values


def _sine_integral(p: np.ndarray) -> np.ndarray:
    """Integral of sin(p pi s) over (0, 1) for integer p."""
    p = np.asarray(p)
    safe = np.where(p == 0, 1, p)
    return np.where(p % 2 != 0, 2.0 / (safe * math.pi), 0.0)


def sine_product_tensor(
    field_modes: np.ndarray, left_modes: np.ndarray, right_modes: np.ndarray
) -> np.ndarray:
    """
    Exact triple products of Dirichlet sine eigenfunctions.

    T[a, b, c] = integral over (0, 1) of e_j e_n e_m with j = field_modes[a],
    n = left_modes[b], m = right_modes[c].

    Args:
        field_modes: Mode numbers j >= 1 of the multiplying field.
        left_modes: Mode numbers n >= 1.
        right_modes: Mode numbers m >= 1.

    Returns:
        Tensor of shape (len(field_modes), len(left_modes), len(right_modes)).
    """
    j = np.asarray(field_modes)[:, None, None]
    n = np.asarray(left_modes)[None, :, None]
    m = np.asarray(right_modes)[None, None, :]
    # 2 sqrt2 sin(a) sin(b) sin(c) = (sqrt2/2)[sin(c+a-b) + sin(c-a+b) - sin(c+a+b) - sin(c-a-b)]
    return (math.sqrt(2.0) / 2.0) * (
        _sine_integral(m + j - n)
        + _sine_integral(m - j + n)
        - _sine_integral(m + j + n)
        - _sine_integral(m - j - n)
    )


def minus_i(pairs: np.ndarray) -> np.ndarray:
    """Multiplication by -i on interleaved (re, im) pairs: (a, b) -> (b, -a)."""
    pairs = np.asarray(pairs, dtype=float)
    result = np.empty_like(pairs)
    result[0::2] = pairs[1::2]
    result[1::2] = -pairs[0::2]
    return result
