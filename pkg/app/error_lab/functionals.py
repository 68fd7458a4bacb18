"""
Test functionals phi in C^2_b(H) used for the weak error.

The C^2_b norm follows |phi(0)| + sup ||phi'|| + sup ||phi''||.
"""

import logging
import math
from typing import Dict

import numpy as np

from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class GaussianBell:
    """
    phi(x) = exp(-||x||^2_H / 2).

    phi'(x) = -phi(x) <x, .>, so ||phi'(x)|| = r exp(-r^2/2) <= e^{-1/2} (at r = 1).
    phi''(x) = phi(x) (<x, .><x, .> - <., .>), whose norm is
    exp(-r^2/2) max(1, |r^2 - 1|) <= 1 (at r = 0). With phi(0) = 1 the
    C^2_b norm is 2 + e^{-1/2}.
    """

    name = "gaussian_bell"

    def __init__(self, h_norm):
        self.h_norm = h_norm

    @property
    def c2_norm(self) -> float:
        return 2.0 + math.exp(-0.5)

    def __call__(self, x: np.ndarray) -> float:
        return math.exp(-0.5 * self.h_norm.norm_sq(x))

    def __repr__(self):
        return f"GaussianBell({self.h_norm!r})"


class SmoothLinear:
    """
    phi(x) = sin(<x, psi>_H) with psi the H-normalized first state coordinate.

    phi(0) = 0, ||phi'|| <= ||psi|| and ||phi''|| <= ||psi||^2.
    """

    name = "smooth_linear"

    def __init__(self, h_norm, size: int):
        if size < 1:
            raise ConfigurationError("Smooth linear functional needs a nonempty state")
        direction = np.zeros(size)
        direction[0] = 1.0
        direction /= h_norm.norm(direction)
        self.direction = direction
        # <x, psi>_H = x . (G psi)
        self._dual = h_norm.gram_matrix() @ direction
        self.psi_norm = h_norm.norm(direction)

    @property
    def c2_norm(self) -> float:
        return self.psi_norm + self.psi_norm**2

    def __call__(self, x: np.ndarray) -> float:
        return math.sin(float(x @ self._dual))

    def __repr__(self):
        return f"SmoothLinear(size={self.direction.size})"


FUNCTIONALS: Dict[str, type] = {
    GaussianBell.name: GaussianBell,
    SmoothLinear.name: SmoothLinear,
}


def make_functional(kind: str, spec):
    """Bind a functional kind to the H norm of an equation."""
    if kind == GaussianBell.name:
        return GaussianBell(spec.h_norm)
    if kind == SmoothLinear.name:
        return SmoothLinear(spec.h_norm, spec.state_size)
    raise ConfigurationError(f"Unknown functional '{kind}', expected one of {sorted(FUNCTIONALS)}")
