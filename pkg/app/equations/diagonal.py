"""
Diagonal model on sequence space: dX = F(X) dt + B dW with Be_k = lambda_k f_k.

There is no generator (S_t = Id); the noise hits one coordinate per mode, so
strong and weak truncation errors have closed forms.
"""

import logging
import math
from typing import Optional

import numpy as np

from app.coefficients.diffusion import ConstantDiffusion
from app.coefficients.drift import AffineDrift, ZeroDrift
from app.equations.EquationSpec_class import (
    CoefficientNorms,
    DiagonalStateNorm,
    EquationSpec,
    IdentityPropagator,
    StateLayout,
)
from app.spectral.bases import Basis
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def make_diagonal(
    lambdas,
    size: int,
    horizon: float = 1.0,
    initial: Optional[np.ndarray] = None,
    f0: Optional[np.ndarray] = None,
    f1: float = 0.0,
) -> EquationSpec:
    """
    Build the diagonal model truncated to `size` coordinates.

    Args:
        lambdas: A lambda family (power law or explicit list).
        size: Number of simulated coordinates, also the largest noise level.
        horizon: Final time T.
        initial: Initial state; zero by default.
        f0: Constant part of the affine drift; zero by default.
        f1: Scalar linear part of the drift.

    Returns:
        The diagonal EquationSpec. Noise mass beyond `size` is kept as the
        analytic remainder of the diffusion tail.
    """
    if size < 1:
        raise ConfigurationError(f"Diagonal model needs at least one coordinate, got {size}")
    basis = Basis.canonical(size)
    initial = np.zeros(size) if initial is None else np.asarray(initial, dtype=float)
    f0 = np.zeros(size) if f0 is None else np.asarray(f0, dtype=float)
    if initial.shape != (size,) or f0.shape != (size,):
        raise ConfigurationError(f"Initial state and f0 need {size} entries")
    drift = ZeroDrift() if not np.any(f0) and f1 == 0 else AffineDrift(f0, f1)
    diffusion = ConstantDiffusion.from_diagonal(
        lambdas.values(size), tail_remainder=lambdas.tail_sq(size)
    )
    h_norm = DiagonalStateNorm(np.ones(size))
    drift_value = float(np.linalg.norm(f0)) + abs(f1)
    norms = CoefficientNorms(
        drift_c1=drift_value,
        drift_c2=drift_value,
        diffusion_c1=math.sqrt(diffusion.tail(0)),
        diffusion_c2=math.sqrt(diffusion.tail(0)),
        drift_lip_v=drift_value,
        diffusion_lip_v=math.sqrt(diffusion.tail(0)),
        initial_h=h_norm.norm(initial),
        initial_v=h_norm.norm(initial),
    )
    logger.info(f"Diagonal model: {size} coordinates, lambdas={lambdas!r}, f1={f1}")
    return EquationSpec(
        name="diagonal",
        layout=StateLayout.SCALAR_FIELD,
        basis=basis,
        h_norm=h_norm,
        v_norm=h_norm,
        propagator=IdentityPropagator(),
        drift=drift,
        diffusion=diffusion,
        initial=initial,
        horizon=horizon,
        noise_resolution=size,
        norms=norms,
        additive_tail=diffusion.tail,
    )
