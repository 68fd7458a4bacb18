"""
EquationSpec: everything the integrator and the error lab need about one equation.

A state is a flat float vector whose layout depends on the family:

- SCALAR_FIELD: one real coefficient per mode (diagonal model, Airy).
- POSITION_VELOCITY: N position coefficients followed by N velocity coefficients.
- COMPLEX_FIELD: interleaved (re, im) pairs, one pair per mode (Schroedinger).
- MATURITY_CURVE: forward-rate values on a uniform maturity grid (HJMM).
"""

import logging
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Callable, Dict, Optional

import numpy as np
from scipy.linalg import eigh

from app.spectral.bases import Basis, complex_to_pairs, minus_i, pairs_to_complex
from app.spectral.operators import InterpolationSpaceNorm, wave_propagator_entries
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

STEP_ALIGNMENT_TOLERANCE = 1e-9


class StateLayout(Enum):
    SCALAR_FIELD = "scalar_field"
    POSITION_VELOCITY = "position_velocity"
    COMPLEX_FIELD = "complex_field"
    MATURITY_CURVE = "maturity_curve"


class DiagonalStateNorm:
    """||x||^2 = sum_i w_i x_i^2 over the flat state vector."""

    def __init__(self, weights: np.ndarray):
        self.weights = np.asarray(weights, dtype=float)
        self.weights.setflags(write=False)

    @classmethod
    def from_space(cls, space: InterpolationSpaceNorm, pairs: bool = False) -> "DiagonalStateNorm":
        weights = space.weights
        return cls(np.repeat(weights, 2) if pairs else weights)

    @classmethod
    def product(cls, first: InterpolationSpaceNorm, second: InterpolationSpaceNorm) -> "DiagonalStateNorm":
        """Norm of the product space first x second."""
        return cls(np.concatenate([first.weights, second.weights]))

    def norm_sq(self, x: np.ndarray) -> float:
        return float(np.sum(self.weights * x**2))

    def norm(self, x: np.ndarray) -> float:
        return math.sqrt(self.norm_sq(x))

    def gram_matrix(self) -> np.ndarray:
        return np.diag(self.weights)

    def __repr__(self):
        return f"DiagonalStateNorm(size={self.weights.size})"


class WeightedDerivativeNorm:
    """
    Discretized ||h||^2 = h(0)^2 + int |h'(tau)|^2 exp(alpha tau) dtau.

    Derivatives are forward differences, the weight is taken at cell midpoints.
    """

    def __init__(self, alpha: float, spacing: float, size: int):
        if alpha <= 0:
            raise ConfigurationError(f"Weight exponent alpha must be positive, got {alpha}")
        self.alpha = alpha
        self.spacing = spacing
        self.size = size
        midpoints = spacing * (np.arange(size - 1) + 0.5)
        self._cell_weights = np.exp(alpha * midpoints) / spacing

    def norm_sq(self, x: np.ndarray) -> float:
        return float(x[0] ** 2 + np.sum(self._cell_weights * np.diff(x) ** 2))

    def norm(self, x: np.ndarray) -> float:
        return math.sqrt(self.norm_sq(x))

    def gram_matrix(self) -> np.ndarray:
        difference = np.diff(np.eye(self.size), axis=0)
        gram = difference.T @ (self._cell_weights[:, None] * difference)
        gram[0, 0] += 1.0
        return gram

    def __repr__(self):
        return f"WeightedDerivativeNorm(alpha={self.alpha}, points={self.size})"


class IdentityPropagator:
    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        return x.copy()

    def __repr__(self):
        return "IdentityPropagator()"


class WavePropagator:
    """exp(t A) for A(a, b) = (b, -omega^2 a), mode by mode."""

    def __init__(self, frequencies: np.ndarray):
        self.frequencies = np.asarray(frequencies, dtype=float)

    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        size = self.frequencies.size
        position, velocity = x[:size], x[size:]
        cosine, sine_over, minus_sine = wave_propagator_entries(self.frequencies, t)
        return np.concatenate(
            [cosine * position + sine_over * velocity, minus_sine * position + cosine * velocity]
        )

    def __repr__(self):
        return f"WavePropagator(modes={self.frequencies.size})"


class PhasePropagator:
    """
    Rotation of every mode by the angle t * symbol.

    complex_pairs=True: each (re, im) pair is multiplied by exp(i t symbol).
    complex_pairs=False: the real torus layout [const, cos_1, sin_1, ...]; the
    (cos_j, sin_j) pair carries the complex coefficient a - i b at +xi_j, so
    multiplying it by exp(i t symbol) maps (a, b) to (a c + b s, b c - a s).
    """

    def __init__(self, symbol: np.ndarray, complex_pairs: bool):
        self.symbol = np.asarray(symbol, dtype=float)
        self.complex_pairs = complex_pairs

    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        cosine = np.cos(t * self.symbol)
        sine = np.sin(t * self.symbol)
        result = np.empty_like(x)
        if self.complex_pairs:
            real, imag = x[0::2], x[1::2]
            result[0::2] = cosine * real - sine * imag
            result[1::2] = sine * real + cosine * imag
            return result
        result[0] = cosine[0] * x[0]
        a, b = x[1::2], x[2::2]
        c, s = cosine[1::2], sine[1::2]
        result[1::2] = a * c + b * s
        result[2::2] = b * c - a * s
        return result

    def __repr__(self):
        kind = "pairs" if self.complex_pairs else "real"
        return f"PhasePropagator(modes={self.symbol.size}, {kind})"


class ShiftPropagator:
    """(S_t x)(tau) = x(tau + t) on a uniform grid, constant beyond the last maturity."""

    def __init__(self, spacing: float):
        self.spacing = spacing

    def offset(self, t: float) -> int:
        steps = t / self.spacing
        rounded = int(round(steps))
        if abs(steps - rounded) > STEP_ALIGNMENT_TOLERANCE or rounded < 0:
            raise ConfigurationError(
                f"Shift by {t} is not a nonnegative multiple of the maturity spacing {self.spacing}"
            )
        return rounded

    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        offset = self.offset(t)
        indices = np.minimum(np.arange(x.size) + offset, x.size - 1)
        return x[indices]

    def matrix(self, t: float, size: int) -> np.ndarray:
        return np.eye(size)[np.minimum(np.arange(size) + self.offset(t), size - 1)]

    def __repr__(self):
        return f"ShiftPropagator(spacing={self.spacing})"


@dataclass(frozen=True)
class CoefficientNorms:
    """Norms entering the explicit error constants (C^k_b norms include the value at 0)."""

    semigroup_h: float = 1.0
    semigroup_v: float = 1.0
    drift_c1: float = 0.0
    drift_c2: float = 0.0
    diffusion_c1: float = 0.0
    diffusion_c2: float = 0.0
    drift_lip_v: float = 0.0
    diffusion_lip_v: float = 0.0
    initial_h: float = 0.0
    initial_v: float = 0.0

    def with_overrides(self, overrides: Optional[Dict[str, float]]) -> "CoefficientNorms":
        """Replace entries by user-supplied values; unknown names are rejected."""
        if not overrides:
            return self
        known = {item.name for item in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigurationError(f"Unknown norm entries: {sorted(unknown)}")
        for name, value in overrides.items():
            if value < 0:
                raise ConfigurationError(f"Norm '{name}' must be nonnegative, got {value}")
        return replace(self, **overrides)

    def as_dict(self) -> Dict[str, float]:
        return {item.name: float(getattr(self, item.name)) for item in fields(self)}


@dataclass(frozen=True)
class EquationSpec:
    """
    One semilinear equation dX = (AX + F(X)) dt + B(X) dW in a fixed state layout.

    `drift` and `diffusion` act on the driving field of the state (the position
    for the wave equation, the complex wave function for Schroedinger); the
    layout decides how their output enters the state, including the -i factor
    of the Schroedinger equation.
    """

    name: str
    layout: StateLayout
    basis: Optional[Basis]
    h_norm: object
    v_norm: object
    propagator: object
    drift: object
    diffusion: object
    initial: np.ndarray = field(repr=False)
    horizon: float
    noise_resolution: Optional[int]
    norms: CoefficientNorms = field(default_factory=CoefficientNorms)
    tail_space: Optional[InterpolationSpaceNorm] = field(default=None, repr=False)
    additive_tail: Optional[Callable[[int], float]] = field(default=None, repr=False)
    step_quantum: Optional[float] = None
    multiply_by_minus_i: bool = False
    parameters: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigurationError(f"Horizon T must be positive, got {self.horizon}")
        initial = np.array(self.initial, dtype=float)
        initial.setflags(write=False)
        object.__setattr__(self, "initial", initial)

    @property
    def state_size(self) -> int:
        return self.initial.size

    def driving_field(self, x: np.ndarray) -> np.ndarray:
        if self.layout is StateLayout.POSITION_VELOCITY:
            return x[: x.size // 2]
        if self.layout is StateLayout.COMPLEX_FIELD:
            return pairs_to_complex(x)
        return x

    def _embed(self, values: np.ndarray) -> np.ndarray:
        if self.layout is StateLayout.POSITION_VELOCITY:
            return np.concatenate([np.zeros(values.size), values])
        if self.layout is StateLayout.COMPLEX_FIELD:
            pairs = complex_to_pairs(np.asarray(values, dtype=complex))
            return minus_i(pairs) if self.multiply_by_minus_i else pairs
        return values

    def drift_term(self, x: np.ndarray, n: int) -> np.ndarray:
        return self._embed(self.drift(self.driving_field(x), n))

    def diffusion_term(self, x: np.ndarray, increments: np.ndarray, n: int) -> np.ndarray:
        return self._embed(self.diffusion.apply(self.driving_field(x), increments, n))

    def propagate(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.propagator.apply(x, t)

    def reference_bias(self, n_ref: int) -> Optional[float]:
        """T * sum_{k >= n_ref} ||Be_k||^2_H for additive noise, else None."""
        if self.additive_tail is None:
            return None
        return self.horizon * float(self.additive_tail(n_ref))

    def check_step(self, step: float):
        if self.step_quantum is None:
            return
        ratio = step / self.step_quantum
        if abs(ratio - round(ratio)) > STEP_ALIGNMENT_TOLERANCE or round(ratio) < 1:
            raise ConfigurationError(
                f"Time step {step} of '{self.name}' must be a multiple of {self.step_quantum}"
            )


def propagator_norm(
    propagator: ShiftPropagator, norm: WeightedDerivativeNorm, times: np.ndarray
) -> float:
    """
    sup_t ||S_t|| in a quadratic norm, via the generalized eigenproblem S^T Q S v = lambda Q v.
    """
    gram = norm.gram_matrix()
    largest = 1.0
    for t in times:
        shift = propagator.matrix(float(t), norm.size)
        top = eigh(shift.T @ gram @ shift, gram, eigvals_only=True)[-1]
        largest = max(largest, math.sqrt(max(top, 0.0)))
    return largest
