"""
HJMM forward-rate equation under the shift semigroup.

    dX_t = (d/dtau X_t + trace m(B P_n, B P_n)) dt + B dW_t,
    m(x, y)(tau) = x(tau) int_0^tau y(s) ds

Curves live on the uniform maturity grid tau_j = j h, j = 0..J, in the
weighted-derivative norm h(0)^2 + int |h'|^2 exp(alpha tau) dtau.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from app.coefficients.diffusion import ConstantDiffusion
from app.coefficients.drift import NoArbitrageDrift
from app.equations.EquationSpec_class import (
    STEP_ALIGNMENT_TOLERANCE,
    CoefficientNorms,
    EquationSpec,
    ShiftPropagator,
    StateLayout,
    WeightedDerivativeNorm,
    propagator_norm,
)
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def maturity_grid(tau_max: float, intervals: int) -> np.ndarray:
    return tau_max * np.arange(intervals + 1) / intervals


def exponential_rows(amplitudes, decays, maturities: np.ndarray) -> np.ndarray:
    """Volatility rows (Be_k)(tau) = a_k exp(-b_k tau)."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    decays = np.asarray(decays, dtype=float)
    if amplitudes.shape != decays.shape:
        raise ConfigurationError("Exponential volatility needs as many decays as amplitudes")
    return amplitudes[:, None] * np.exp(-decays[:, None] * maturities[None, :])


def diagonal_bilinear_ratio(rows: np.ndarray, spacing: float, norm: WeightedDerivativeNorm) -> float:
    """
    max_k ||m(Be_k, Be_k)|| / ||Be_k||^2 over the volatility rows.

    This is not the operator norm of m. It only controls m on the diagonal
    pairs (Be_k, Be_k), which is all the drift difference
    trace m(B, B) - trace m(BP_n, BP_n) = sum_{k>=n} m(Be_k, Be_k) involves.
    """
    ratios = []
    for row in np.atleast_2d(rows):
        size_sq = norm.norm_sq(row)
        if size_sq == 0:
            continue
        image = row * cumulative_trapezoid(row, dx=spacing, initial=0.0)
        ratios.append(norm.norm(image) / size_sq)
    return max(ratios, default=0.0)


def make_hjmm(
    rows: np.ndarray,
    alpha: float,
    tau_max: float,
    intervals: int,
    initial: np.ndarray,
    horizon: float,
    drift_mode: str = "truncated",
) -> EquationSpec:
    """
    Build the HJMM equation.

    Args:
        rows: Volatility curves Be_k on the maturity grid, shape (K, J + 1).
        alpha: Weight exponent of the curve norm.
        tau_max: Longest maturity.
        intervals: J, number of maturity intervals.
        initial: Initial forward curve on the grid.
        horizon: Final time T, a multiple of the maturity spacing.
        drift_mode: "truncated" for trace m(BP_n, BP_n), "full" for trace m(B, B).

    Returns:
        The HJMM EquationSpec; time steps must be multiples of tau_max / J.

    Raises:
        ConfigurationError: If T is not grid-aligned or shapes disagree.
    """
    if intervals < 1 or tau_max <= 0:
        raise ConfigurationError(f"Need J >= 1 and tau_max > 0, got {intervals} and {tau_max}")
    spacing = tau_max / intervals
    ratio = horizon / spacing
    if abs(ratio - round(ratio)) > STEP_ALIGNMENT_TOLERANCE:
        raise ConfigurationError(
            f"Maturity spacing {spacing} does not divide the horizon {horizon}"
        )
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    initial = np.asarray(initial, dtype=float)
    if rows.shape[1] != intervals + 1 or initial.shape != (intervals + 1,):
        raise ConfigurationError(
            f"Curves must have {intervals + 1} grid values, got rows {rows.shape} and initial {initial.shape}"
        )
    norm = WeightedDerivativeNorm(alpha, spacing, intervals + 1)
    propagator = ShiftPropagator(spacing)
    drift = NoArbitrageDrift(rows, spacing, drift_mode)
    diffusion = ConstantDiffusion(rows=rows, norm=norm)

    shifts = spacing * np.arange(int(round(ratio)) + 1)
    semigroup = propagator_norm(propagator, norm, shifts)
    drift_value = norm.norm(drift.curve(None))
    diffusion_value = math.sqrt(diffusion.tail(0))
    norms = CoefficientNorms(
        semigroup_h=semigroup,
        semigroup_v=semigroup,
        drift_c1=drift_value,
        drift_c2=drift_value,
        diffusion_c1=diffusion_value,
        diffusion_c2=diffusion_value,
        drift_lip_v=drift_value,
        diffusion_lip_v=diffusion_value,
        initial_h=norm.norm(initial),
        initial_v=norm.norm(initial),
    )
    logger.info(
        f"HJMM equation: {rows.shape[0]} volatility rows, J={intervals}, tau_max={tau_max}, "
        f"alpha={alpha}, drift={drift_mode}, ||S||={semigroup:.6g}"
    )
    return EquationSpec(
        name="hjmm",
        layout=StateLayout.MATURITY_CURVE,
        basis=None,
        h_norm=norm,
        v_norm=norm,
        propagator=propagator,
        drift=drift,
        diffusion=diffusion,
        initial=initial,
        horizon=horizon,
        noise_resolution=None,
        norms=norms,
        additive_tail=diffusion.tail,
        step_quantum=spacing,
        parameters={"alpha": alpha, "tau_max": tau_max, "intervals": intervals},
    )


def accumulated_drift_difference(spec: EquationSpec, n: int, steps: int) -> np.ndarray:
    """
    sum_m h S_{T - t_m} (D_n - D_full) for the exponential Euler time grid.

    This is the exact terminal difference between two noise-free runs that only
    differ in the drift (truncated at level n versus untruncated).
    """
    step = spec.horizon / steps
    spec.check_step(step)
    difference = spec.drift.curve(n) - spec.drift.curve(None)
    total = np.zeros_like(difference)
    for m in range(steps):
        total += step * spec.propagate(difference, spec.horizon - m * step)
    return total


def drift_tail_bound(spec: EquationSpec, n: int, bilinear: Optional[float] = None) -> float:
    """
    2 T ||S|| c_m sum_{k>=n} ||Be_k||^2 with c_m the diagonal ratio of m.

    `bilinear` defaults to `diagonal_bilinear_ratio` of the rows; any bound on
    the operator norm of m also works.
    """
    if bilinear is None:
        bilinear = diagonal_bilinear_ratio(spec.drift.rows, spec.drift.spacing, spec.h_norm)
    return 2.0 * spec.horizon * spec.norms.semigroup_h * bilinear * spec.diffusion.tail(n)
