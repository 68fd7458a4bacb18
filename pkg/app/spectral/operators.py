"""
Diagonal operators, interpolation-space norms and exact propagators.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from app.spectral.bases import Basis, BasisKind
from app.utils.errors import ConfigurationError, DomainError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]


@dataclass(frozen=True)
class DiagonalOperator:
    """Operator acting mode-wise by multiplication with `eigenvalues`."""

    basis: Basis
    eigenvalues: np.ndarray

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float)
        if values.shape != (self.basis.size,):
            raise ConfigurationError(
                f"Expected {self.basis.size} eigenvalues, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)

    @classmethod
    def dirichlet_laplacian(cls, basis: Basis, theta: float = 1.0) -> "DiagonalOperator":
        """-theta * d^2/ds^2 on (0, 1) with Dirichlet conditions: mu_k = theta k^2 pi^2."""
        if basis.kind is not BasisKind.DIRICHLET_SINE:
            raise ConfigurationError("The Dirichlet Laplacian needs the sine basis")
        if theta <= 0:
            raise ConfigurationError(f"theta must be positive, got {theta}")
        return cls(basis, theta * basis.wavenumbers**2)

    @classmethod
    def fourier_symbol(cls, basis: Basis, power: int) -> "DiagonalOperator":
        """Mode-wise xi_j ** power on the torus (power 2 for Schroedinger, 3 for Airy)."""
        if basis.kind is not BasisKind.FOURIER_TORUS:
            raise ConfigurationError("Fourier symbols need the torus basis")
        return cls(basis, basis.wavenumbers**power)

    @classmethod
    def bessel_potential(cls, basis: Basis) -> "DiagonalOperator":
        """sqrt(1 + xi^2) on the torus; its H_r norm is the Sobolev H^r norm."""
        if basis.kind is not BasisKind.FOURIER_TORUS:
            raise ConfigurationError("The Bessel potential needs the torus basis")
        return cls(basis, np.sqrt(1.0 + basis.wavenumbers**2))

    @classmethod
    def identity(cls, basis: Basis) -> "DiagonalOperator":
        return cls(basis, np.ones(basis.size))

    @classmethod
    def zero(cls, basis: Basis) -> "DiagonalOperator":
        return cls(basis, np.zeros(basis.size))

    def power(self, exponent: float) -> np.ndarray:
        """Entries mu_k ** exponent; exponent 0 gives exact ones."""
        if exponent == 0:
            return np.ones_like(self.eigenvalues)
        if np.any(self.eigenvalues < 0) or (
            exponent < 0 and np.any(self.eigenvalues == 0)
        ):
            raise DomainError(
                f"Fractional power {exponent} undefined for eigenvalues {self.eigenvalues.min()}"
            )
        return self.eigenvalues**exponent

    def __repr__(self):
        return (
            f"DiagonalOperator(basis={self.basis.kind.value}, size={self.basis.size}, "
            f"range=[{self.eigenvalues.min():.4g}, {self.eigenvalues.max():.4g}])"
        )


@dataclass(frozen=True)
class InterpolationSpaceNorm:
    """Norm of H_r = dom(op^r): ||x||^2 = sum_k mu_k^(2r) x_k^2."""

    operator: DiagonalOperator
    exponent: float

    @property
    def basis(self) -> Basis:
        return self.operator.basis

    @property
    def weights(self) -> np.ndarray:
        """Squared-norm weights mu_k^(2r)."""
        return self.operator.power(2.0 * self.exponent)

    def norm_sq(self, coefficients: np.ndarray) -> float:
        coefficients = np.asarray(coefficients)
        weights = self.weights
        if coefficients.shape[-1] == 2 * weights.size:
            weights = np.repeat(weights, 2)
        return float(np.sum(weights * np.abs(coefficients) ** 2))

    def norm(self, coefficients: np.ndarray) -> float:
        return math.sqrt(self.norm_sq(coefficients))


def wave_mode_propagator(mu: float, t: float) -> np.ndarray:
    """
    Mode-wise exp(t A) for the wave generator A(a, b) = (b, -mu^2 a).

    Args:
        mu: Angular frequency sqrt(theta) k pi of the mode, positive.
        t: Time, any sign.

    Returns:
        2x2 matrix [[cos(mu t), sin(mu t)/mu], [-mu sin(mu t), cos(mu t)]].
    """
    cosine = math.cos(mu * t)
    sine = math.sin(mu * t)
    return np.array([[cosine, sine / mu], [-mu * sine, cosine]])


def wave_propagator_entries(
    mus: np.ndarray, t: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized wave_mode_propagator: (cos, sin/mu, -mu sin) per mode."""
    mus = np.asarray(mus, dtype=float)
    cosine = np.cos(mus * t)
    sine = np.sin(mus * t)
    return cosine, sine / mus, -mus * sine


def phase_propagator(symbol: ArrayOrFloat, t: float) -> Tuple[ArrayOrFloat, ArrayOrFloat]:
    """(cos, sin) of the rotation angle t * symbol; accepts scalars or arrays."""
    if np.ndim(symbol) == 0:
        return math.cos(t * symbol), math.sin(t * symbol)
    angle = t * np.asarray(symbol, dtype=float)
    return np.cos(angle), np.sin(angle)


def heat_propagator(operator: DiagonalOperator, t: float) -> DiagonalOperator:
    """exp(-t mu_k): the semigroup generated by -operator."""
    if t < 0:
        raise DomainError(f"The heat semigroup is only defined for t >= 0, got {t}")
    return DiagonalOperator(operator.basis, np.exp(-t * operator.eigenvalues))


def yosida_propagator(
    operator: DiagonalOperator, resolvent_parameter: float, t: float
) -> DiagonalOperator:
    """
    Semigroup of the Yosida approximant of the generator -operator.

    Mode-wise the approximant is a(k) = -mu_k / (1 + mu_k / lambda), a bounded
    generator whose semigroup converges to exp(-t mu_k) as lambda grows.

    Args:
        operator: Nonnegative diagonal operator (eigenvalues mu_k).
        resolvent_parameter: lambda > 0.
        t: Time, t >= 0.

    Returns:
        Diagonal operator with entries exp(t a(k)), each in (0, 1].

    Raises:
        DomainError: If lambda <= 0, t < 0 or some mu_k < 0.
    """
    if resolvent_parameter <= 0:
        raise DomainError(
            f"Yosida parameter must be positive, got {resolvent_parameter}"
        )
    if t < 0:
        raise DomainError(f"Yosida semigroup is only defined for t >= 0, got {t}")
    mus = operator.eigenvalues
    if np.any(mus < 0):
        raise DomainError("Yosida approximation needs a nonnegative operator")
    generator = -mus / (1.0 + mus / resolvent_parameter)
    return DiagonalOperator(operator.basis, np.exp(t * generator))
