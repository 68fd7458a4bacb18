"""
Stochastic Schroedinger and linearized KdV (Airy) equations on the torus [-L, L).

    Schroedinger:  dX = (-i Delta X - i F(X)) dt - i B(X) dW  (rotation by t xi^2)
    Airy:          dX = (-d^3/dx^3 X + F(X)) dt + B(X) dW     (rotation by t xi^3)

F(u) = f0 + f1 u with a scalar f1, B(u) w = (b0 + b1 u) Sigma w with
Sigma e_k = (1 + xi_k^2)^(-s/2) e_k. The periodic torus stands in for the line.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import quad

from app.coefficients.diffusion import ColumnSumTail, PointwiseAffineDiffusion, Profile
from app.coefficients.drift import AffineDrift, ZeroDrift
from app.equations.EquationSpec_class import (
    CoefficientNorms,
    DiagonalStateNorm,
    EquationSpec,
    PhasePropagator,
    StateLayout,
)
from app.spectral.bases import DEFAULT_HALF_LENGTH, Basis, CollocationGrid, complex_to_pairs
from app.spectral.operators import DiagonalOperator, InterpolationSpaceNorm
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _profile_coefficients(profile: Profile, basis: Basis, grid: Optional[CollocationGrid]) -> np.ndarray:
    if np.ndim(profile) == 0:
        return float(profile) * basis.constant_one()
    if grid is None:
        grid = CollocationGrid.for_basis(basis)
    return grid.analyze(profile(grid.points))


def sigma_weights(basis: Basis, sigma_exponent: float) -> np.ndarray:
    """Diagonal of Sigma: (1 + xi^2)^(-s/2) per real torus mode."""
    return (1.0 + basis.wavenumbers**2) ** (-sigma_exponent / 2.0)


def sigma_tail_remainder(basis: Basis, sigma_exponent: float, multiplicity: int) -> float:
    """Bound on sum over wavenumbers j > J of multiplicity * (1 + (j pi / L)^2)^(-s)."""
    scale = math.pi / basis.half_length
    value, _ = quad(lambda x: (1.0 + (scale * x) ** 2) ** (-sigma_exponent), basis.cutoff, np.inf)
    return multiplicity * value


def _make_torus_equation(
    name: str,
    cutoff: int,
    half_length: float,
    f0: Profile,
    f1: float,
    b0: Profile,
    b1: float,
    sigma_exponent: float,
    regularity: float,
    initial: np.ndarray,
    horizon: float,
    grid: Optional[CollocationGrid],
    diffusion_lipschitz: Optional[float],
) -> EquationSpec:
    schrodinger = name == "schrodinger"
    if regularity <= 0.5:
        raise ConfigurationError(f"V needs regularity r > 1/2, got r = {regularity}")
    if sigma_exponent <= regularity + 0.5:
        raise ConfigurationError(
            f"Sigma exponent s must exceed r + 1/2 = {regularity + 0.5} for a Hilbert-Schmidt "
            f"noise into V, got {sigma_exponent}"
        )
    basis = Basis.fourier_torus(cutoff, half_length)
    needs_grid = np.ndim(b0) != 0 or b1 != 0
    if grid is None and (needs_grid or np.ndim(f0) != 0):
        grid = CollocationGrid.for_basis(basis)

    f0_coefficients = _profile_coefficients(f0, basis, grid)
    if not np.any(f0_coefficients) and f1 == 0:
        drift = ZeroDrift()
    else:
        drift = AffineDrift(f0_coefficients, float(f1))

    bessel = DiagonalOperator.bessel_potential(basis)
    h_space = InterpolationSpaceNorm(bessel, 0.0)
    v_space = InterpolationSpaceNorm(bessel, regularity)
    sigma = sigma_weights(basis, sigma_exponent)
    multiplicity = 4 if schrodinger else 2
    column_modes = np.arange(2 * basis.size) // 2 if schrodinger else np.arange(basis.size)
    b0_coefficients = _profile_coefficients(b0, basis, grid)
    if diffusion_lipschitz is None:
        diffusion_lipschitz = v_space.norm(b0_coefficients) + abs(b1)
    tail = ColumnSumTail(
        sigma[column_modes] ** 2,
        remainder=sigma_tail_remainder(basis, sigma_exponent, multiplicity),
        factor=2.0 * diffusion_lipschitz**2,
    )
    diffusion = PointwiseAffineDiffusion(
        basis,
        b0=b0,
        b1=b1,
        grid=grid if needs_grid else None,
        sigma=sigma,
        complex_noise=schrodinger,
        tail_model=tail,
    )

    initial = np.asarray(initial)
    if schrodinger and np.iscomplexobj(initial):
        initial = complex_to_pairs(initial)
    expected = basis.size * (2 if schrodinger else 1)
    if initial.shape != (expected,):
        raise ConfigurationError(f"Initial state of '{name}' needs {expected} values, got {initial.shape}")
    h_norm = DiagonalStateNorm.from_space(h_space, pairs=schrodinger)
    v_norm = DiagonalStateNorm.from_space(v_space, pairs=schrodinger)

    # Fourier multipliers are unitary on every H^r, so ||S|| = 1 on H and V
    noise_columns = diffusion.noise_columns
    b0_hs = math.sqrt(float(np.sum(diffusion.column_norms_sq(np.zeros(basis.size), noise_columns))))
    b0_hs_v = math.sqrt(
        float(np.sum(diffusion.column_norms_sq(np.zeros(basis.size), noise_columns, weights=v_space.weights)))
    )
    column_count = 2 if schrodinger else 1
    sigma_hs_h = math.sqrt(column_count * float(np.sum(sigma**2)))
    sigma_hs_v = math.sqrt(column_count * float(np.sum(sigma**2 * v_space.weights)))
    sup_basis = float(np.max(basis.sup_norms()))
    drift_value = h_space.norm(f0_coefficients) + abs(f1)
    if b1 != 0:
        logger.warning(
            f"{name}: Lipschitz constant of the multiplicative noise on V assumes a unit H^r algebra constant"
        )
    norms = CoefficientNorms(
        semigroup_h=1.0,
        semigroup_v=1.0,
        drift_c1=drift_value,
        drift_c2=drift_value,
        diffusion_c1=b0_hs + abs(b1) * sup_basis * sigma_hs_h,
        diffusion_c2=b0_hs + abs(b1) * sup_basis * sigma_hs_h,
        drift_lip_v=v_space.norm(f0_coefficients) + abs(f1),
        diffusion_lip_v=b0_hs_v + abs(b1) * sigma_hs_v,
        initial_h=h_norm.norm(initial),
        initial_v=v_norm.norm(initial),
    )
    power = 2 if schrodinger else 3
    logger.info(
        f"{name} equation: J={cutoff}, L={half_length}, r={regularity}, s={sigma_exponent}, "
        f"multiplicative={b1 != 0}"
    )
    return EquationSpec(
        name=name,
        layout=StateLayout.COMPLEX_FIELD if schrodinger else StateLayout.SCALAR_FIELD,
        basis=basis,
        h_norm=h_norm,
        v_norm=v_norm,
        propagator=PhasePropagator(basis.wavenumbers**power, complex_pairs=schrodinger),
        drift=drift,
        diffusion=diffusion,
        initial=initial,
        horizon=horizon,
        noise_resolution=noise_columns,
        norms=norms,
        tail_space=v_space,
        multiply_by_minus_i=schrodinger,
        parameters={
            "half_length": half_length,
            "regularity": regularity,
            "sigma_exponent": sigma_exponent,
        },
    )


def make_schrodinger(
    cutoff: int,
    initial: np.ndarray,
    horizon: float,
    half_length: float = DEFAULT_HALF_LENGTH,
    f0: Profile = 0.0,
    f1: float = 0.0,
    b0: Profile = 0.0,
    b1: float = 0.0,
    sigma_exponent: float = 2.0,
    regularity: float = 1.0,
    grid: Optional[CollocationGrid] = None,
    diffusion_lipschitz: Optional[float] = None,
) -> EquationSpec:
    """
    Build the stochastic Schroedinger equation.

    The state holds one complex coefficient per real torus mode as an (re, im)
    pair. Noise columns 2m and 2m + 1 drive the real and imaginary unit of mode m.

    Raises:
        ConfigurationError: If r <= 1/2 or s <= r + 1/2.
    """
    return _make_torus_equation(
        "schrodinger", cutoff, half_length, f0, f1, b0, b1,
        sigma_exponent, regularity, initial, horizon, grid, diffusion_lipschitz,
    )


def make_airy(
    cutoff: int,
    initial: np.ndarray,
    horizon: float,
    half_length: float = DEFAULT_HALF_LENGTH,
    f0: Profile = 0.0,
    f1: float = 0.0,
    b0: Profile = 0.0,
    b1: float = 0.0,
    sigma_exponent: float = 2.0,
    regularity: float = 1.0,
    grid: Optional[CollocationGrid] = None,
    diffusion_lipschitz: Optional[float] = None,
) -> EquationSpec:
    """Build the linearized KdV equation; real state in the torus basis."""
    return _make_torus_equation(
        "airy", cutoff, half_length, f0, f1, b0, b1,
        sigma_exponent, regularity, initial, horizon, grid, diffusion_lipschitz,
    )

