"""
Nonlinear stochastic wave equation on (0, 1) with Dirichlet conditions.

    d(X1, X2) = (X2, theta X1'' + f(X1)) dt + (0, (b0 + b1 X1) dW)

State space H = H_eta x H_{eta-1/2}, regularity space V = H_rho x H_{rho-1/2}
with rho = (1 - epsilon)/4, both built on the Dirichlet Laplacian -theta d^2/ds^2.
"""

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.special import zeta

from app.coefficients.diffusion import (
    HurwitzTail,
    PointwiseAffineDiffusion,
    PowerLawTail,
    Profile,
)
from app.coefficients.drift import AffineDrift, NemytskiiDrift, ZeroDrift
from app.coefficients.multiplication import multiplication_hs_norm, multiplication_norm_sq
from app.equations.EquationSpec_class import (
    CoefficientNorms,
    DiagonalStateNorm,
    EquationSpec,
    StateLayout,
    WavePropagator,
)
from app.spectral.bases import Basis, CollocationGrid
from app.spectral.fields import SpectralField
from app.spectral.operators import DiagonalOperator, InterpolationSpaceNorm
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

WaveDrift = Union[ZeroDrift, AffineDrift, NemytskiiDrift]


def wave_grid(modes: int, size: Optional[int] = None) -> CollocationGrid:
    """Collocation grid shared by the wave drift and diffusion."""
    return CollocationGrid.for_basis(Basis.dirichlet_sine(modes), size)


def _check_parameters(epsilon: float, eta: float, drift: WaveDrift, sigma_exponent: float):
    if not 0 < epsilon < 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {epsilon}")
    rho = (1.0 - epsilon) / 4.0
    if sigma_exponent <= 0.25:
        raise ConfigurationError(
            f"b1 regularity exponent sigma must exceed 1/4, got {sigma_exponent}"
        )
    if eta == 0:
        if isinstance(drift, NemytskiiDrift):
            raise ConfigurationError("eta = 0 (case a) needs a zero or affine drift")
        return
    if isinstance(drift, AffineDrift) and not drift.is_zero:
        raise ConfigurationError("An affine drift requires eta = 0 (case a)")
    upper = min(rho, 0.25 - rho)
    if not 0 < eta < upper:
        raise ConfigurationError(
            f"eta must lie in (0, min(rho, 1/4 - rho)) = (0, {upper:.6g}) for rho = {rho:.6g}, got {eta}"
        )


def _sup_on_grid(profile: Profile, grid: CollocationGrid) -> float:
    if np.ndim(profile) == 0:
        return abs(float(profile))
    return float(np.max(np.abs(profile(grid.points))))


def _profile_field(profile: Profile, basis: Basis, grid: CollocationGrid) -> SpectralField:
    if np.ndim(profile) == 0:
        return SpectralField(basis, float(profile) * basis.constant_one())
    return SpectralField(basis, grid.analyze(profile(grid.points)))


def _drift_norms(
    drift: WaveDrift,
    laplacian: DiagonalOperator,
    eta: float,
    h_velocity: InterpolationSpaceNorm,
    v_velocity: InterpolationSpaceNorm,
):
    """(C^1_b, C^2_b, Lip on V) of u -> f(u); the value at 0 is part of every norm."""
    mu_1 = laplacian.eigenvalues[0]
    if isinstance(drift, ZeroDrift):
        return 0.0, 0.0, 0.0
    if isinstance(drift, AffineDrift):
        # ||f1 v||_{H_{-1/2}} <= mu_1^{-1/2} sup|f1| ||v||_H, same constant from H_rho to H_{rho-1/2}
        value = h_velocity.norm(drift.f0)
        first = drift.linear_bound / math.sqrt(mu_1)
        return value + first, value + first, v_velocity.norm(drift.f0) + first
    at_zero = drift(np.zeros(laplacian.basis.size))
    value = h_velocity.norm(at_zero)
    first = drift.nonlinearity.first_derivative_bound / math.sqrt(mu_1)
    # ||g||_{H_{eta-1/2}} <= ||g||_{L^1} sqrt(2 sum_k mu_k^{2 eta - 1}) and
    # ||v w||_{L^1} <= ||v||_H ||w||_H <= mu_1^{-2 eta} ||v||_{H_eta} ||w||_{H_eta}
    theta_pi_sq = mu_1
    embedding = math.sqrt(2.0 * theta_pi_sq ** (2.0 * eta - 1.0) * zeta(2.0 - 4.0 * eta))
    second = drift.nonlinearity.second_derivative_bound * embedding * mu_1 ** (-2.0 * eta)
    return value + first, value + first + second, v_velocity.norm(at_zero) + first


def make_wave(
    theta: float,
    epsilon: float,
    eta: float,
    drift: Optional[WaveDrift],
    b0: Profile,
    b1: Profile,
    sigma_exponent: float,
    initial_position: np.ndarray,
    initial_velocity: np.ndarray,
    horizon: float,
    modes: int,
    grid: Optional[CollocationGrid] = None,
    diffusion_lipschitz: Optional[float] = None,
    norm_cutoff: int = 64,
) -> EquationSpec:
    """
    Build the wave equation.

    Args:
        theta: Wave speed squared.
        epsilon: Rate parameter in (0, 1); rho = (1 - epsilon)/4.
        eta: State-space exponent; 0 with an affine drift, inside (0, min(rho, 1/4 - rho)) otherwise.
        drift: Zero, affine (case a) or Nemytskii (case b) drift of the position.
        b0: Additive part of the noise multiplier (constant or profile).
        b1: Multiplicative part (constant or profile).
        sigma_exponent: Regularity exponent of b1, above 1/4.
        initial_position: N position coefficients.
        initial_velocity: N velocity coefficients.
        horizon: Final time T.
        modes: Spectral truncation N (also the largest admissible noise level).
        grid: Collocation grid; built when the coefficients need one.
        diffusion_lipschitz: Linear-growth constant of x -> b0 + b1 x on H_rho;
            defaults to ||b0||_{H_rho} + sup|b1|.
        norm_cutoff: Truncation for the multiplication-operator norms.

    Returns:
        The wave EquationSpec.

    Raises:
        ConfigurationError: If a parameter violates the admissible ranges.
    """
    drift = drift or ZeroDrift()
    _check_parameters(epsilon, eta, drift, sigma_exponent)
    rho = (1.0 - epsilon) / 4.0
    basis = Basis.dirichlet_sine(modes)
    laplacian = DiagonalOperator.dirichlet_laplacian(basis, theta)
    h_position = InterpolationSpaceNorm(laplacian, eta)
    h_velocity = InterpolationSpaceNorm(laplacian, eta - 0.5)
    v_position = InterpolationSpaceNorm(laplacian, rho)
    v_velocity = InterpolationSpaceNorm(laplacian, rho - 0.5)

    initial = np.concatenate([np.asarray(initial_position, float), np.asarray(initial_velocity, float)])
    if initial.size != 2 * modes:
        raise ConfigurationError(f"Initial state needs {2 * modes} coefficients, got {initial.size}")

    needs_grid = not (np.ndim(b0) == 0 and np.ndim(b1) == 0 and b1 == 0)
    if grid is None and (needs_grid or isinstance(drift, NemytskiiDrift)):
        grid = wave_grid(modes)

    sup_b1 = _sup_on_grid(b1, grid) if grid is not None else abs(float(b1))
    b0_field = _profile_field(b0, basis, grid) if grid is not None else SpectralField(
        basis, float(b0) * basis.constant_one()
    )
    if diffusion_lipschitz is None:
        diffusion_lipschitz = v_position.norm(b0_field.coefficients) + sup_b1
    cutoff = min(norm_cutoff, modes)
    multiplier_sq = multiplication_norm_sq(laplacian, rho, rho, eta - 0.5, cutoff)
    tail_constant = 2.0 * laplacian.eigenvalues[0] ** (-2.0 * rho) * multiplier_sq * diffusion_lipschitz**2
    diffusion = PointwiseAffineDiffusion(
        basis,
        b0=b0,
        b1=b1,
        grid=grid if needs_grid else None,
        norm_weights=h_velocity.weights,
        tail_model=PowerLawTail(tail_constant, epsilon - 1.0),
    )

    additive_tail = None
    if not needs_grid:
        # ||b0 e_k||^2_{H_{eta-1/2}} = b0^2 (theta pi^2)^{2 eta - 1} k^{4 eta - 2}
        factor = float(b0) ** 2 * laplacian.eigenvalues[0] ** (2.0 * eta - 1.0)
        additive_tail = HurwitzTail(factor, 2.0 - 4.0 * eta, offset=1)

    drift_c1, drift_c2, drift_lip = _drift_norms(drift, laplacian, eta, h_velocity, v_velocity)
    b0_hs = math.sqrt(multiplication_hs_norm(b0_field, 0.0, eta - 0.5, cutoff, theta))
    derivative_h = sup_b1 * math.sqrt(multiplication_norm_sq(laplacian, eta, 0.0, eta - 0.5, cutoff))
    derivative_v = sup_b1 * math.sqrt(multiplication_norm_sq(laplacian, rho, 0.0, rho - 0.5, cutoff))
    b0_hs_v = math.sqrt(
        float(np.sum(diffusion.column_norms_sq(np.zeros(modes), modes, weights=v_velocity.weights)))
    )
    h_norm = DiagonalStateNorm.product(h_position, h_velocity)
    v_norm = DiagonalStateNorm.product(v_position, v_velocity)
    norms = CoefficientNorms(
        semigroup_h=1.0,
        semigroup_v=1.0,
        drift_c1=drift_c1,
        drift_c2=drift_c2,
        diffusion_c1=b0_hs + derivative_h,
        diffusion_c2=b0_hs + derivative_h,
        drift_lip_v=drift_lip,
        diffusion_lip_v=b0_hs_v + derivative_v,
        initial_h=h_norm.norm(initial),
        initial_v=v_norm.norm(initial),
    )
    logger.info(
        f"Wave equation: N={modes}, theta={theta}, epsilon={epsilon}, eta={eta}, "
        f"rho={rho:.4g}, multiplicative={needs_grid}"
    )
    return EquationSpec(
        name="wave",
        layout=StateLayout.POSITION_VELOCITY,
        basis=basis,
        h_norm=h_norm,
        v_norm=v_norm,
        propagator=WavePropagator(np.sqrt(laplacian.eigenvalues)),
        drift=drift,
        diffusion=diffusion,
        initial=initial,
        horizon=horizon,
        noise_resolution=modes,
        norms=norms,
        tail_space=v_position,
        additive_tail=additive_tail,
        parameters={"theta": theta, "epsilon": epsilon, "eta": eta, "rho": rho},
    )
