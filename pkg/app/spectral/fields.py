"""
Spectral fields: coefficient vectors tagged with their basis.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from app.spectral.bases import Basis, CollocationGrid, complex_to_pairs
from app.spectral.operators import InterpolationSpaceNorm
from app.utils.errors import ConfigurationError, IncompatibleSpacesError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralField:
    """
    Function represented by its coefficients in an orthonormal basis.

    Complex-valued fields store each complex coefficient as an interleaved
    (re, im) pair, so the vector is twice as long as the basis.
    """

    basis: Basis
    coefficients: np.ndarray
    complex_pairs: bool = False

    def __post_init__(self):
        values = np.array(self.coefficients, dtype=float)
        expected = self.basis.size * (2 if self.complex_pairs else 1)
        if values.shape != (expected,):
            raise ConfigurationError(
                f"Field on {self.basis.size} modes needs {expected} coefficients, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "coefficients", values)

    @property
    def truncation(self) -> int:
        return self.basis.size

    @classmethod
    def zeros(cls, basis: Basis, complex_pairs: bool = False) -> "SpectralField":
        return cls(basis, np.zeros(basis.size * (2 if complex_pairs else 1)), complex_pairs)

    @classmethod
    def mode(cls, basis: Basis, index: int, amplitude: float = 1.0) -> "SpectralField":
        """Single basis element (0-based position in the basis ordering)."""
        if not 0 <= index < basis.size:
            raise ConfigurationError(f"Mode index {index} outside basis of size {basis.size}")
        values = np.zeros(basis.size)
        values[index] = amplitude
        return cls(basis, values)

    @classmethod
    def constant_one(cls, basis: Basis) -> "SpectralField":
        """Projection of the constant function 1."""
        return cls(basis, basis.constant_one())

    @classmethod
    def from_function(
        cls,
        basis: Basis,
        function: Callable[[np.ndarray], np.ndarray],
        grid: Optional[CollocationGrid] = None,
    ) -> "SpectralField":
        """Project a vectorized function by collocation; complex output becomes pairs."""
        grid = grid or CollocationGrid.for_basis(basis)
        coefficients = grid.analyze(function(grid.points))
        if np.iscomplexobj(coefficients):
            return cls(basis, complex_to_pairs(coefficients), complex_pairs=True)
        return cls(basis, coefficients)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.basis, self.coefficients + other.coefficients, self.complex_pairs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.basis, self.coefficients - other.coefficients, self.complex_pairs)

    def scaled(self, factor: float) -> "SpectralField":
        return SpectralField(self.basis, factor * self.coefficients, self.complex_pairs)

    def _check_compatible(self, other: "SpectralField"):
        if other.basis != self.basis or other.complex_pairs != self.complex_pairs:
            raise IncompatibleSpacesError(
                f"Cannot combine fields on {self.basis} and {other.basis}"
            )

    def __repr__(self):
        kind = "complex" if self.complex_pairs else "real"
        return f"SpectralField({self.basis.kind.value}, modes={self.truncation}, {kind})"


def fractional_norm(x: SpectralField, space: InterpolationSpaceNorm) -> float:
    """
    Norm of a field in an interpolation space.

    Args:
        x: Field to measure.
        space: H_r norm over the same basis.

    Returns:
        sqrt(sum_k mu_k^(2r) x_k^2); complex pairs share the weight of their mode.

    Raises:
        IncompatibleSpacesError: If the field and the norm use different bases.
    """
    if x.basis != space.basis:
        raise IncompatibleSpacesError(
            f"Field basis {x.basis} does not match norm basis {space.basis}"
        )
    return space.norm(x.coefficients)
