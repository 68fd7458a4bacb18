"""
Hilbert-Schmidt and operator norms of pointwise multiplication on the sine basis.

All inner products <x e_n, e_m> come from the exact triple-product tensor, so the
truncated sums below are exact for finitely supported x.
"""

import logging

import numpy as np
from scipy.linalg import eigh

from app.spectral.bases import BasisKind, sine_product_tensor
from app.spectral.fields import SpectralField
from app.spectral.operators import DiagonalOperator
from app.utils.errors import ConfigurationError, DomainError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _laplacian_eigenvalues(cutoff: int, theta: float) -> np.ndarray:
    modes = np.arange(1, cutoff + 1)
    return theta * (np.pi * modes) ** 2


def multiplication_hs_norm(
    x: SpectralField, gamma: float, beta: float, cutoff: int, theta: float = 1.0
) -> float:
    """
    Squared HS norm of u -> x u from H_{-gamma} to H_beta, truncated at `cutoff`.

    Evaluates sum_{m <= cutoff} mu_m^(2 beta) ||x e_m||^2_{H_gamma}, where
    ||x e_m||^2_{H_gamma} is itself summed over the first `cutoff` modes.
    Every term is nonnegative, so the value grows with the cutoff.

    Args:
        x: Field on the Dirichlet sine basis.
        gamma: Exponent in [0, 1/4).
        beta: Exponent below -1/4 - gamma.
        cutoff: Number of modes in both sums.
        theta: Diffusion constant of the Laplacian.

    Returns:
        The truncated squared norm.

    Raises:
        DomainError: If gamma or beta leave the range where the series converges.
    """
    if x.basis.kind is not BasisKind.DIRICHLET_SINE:
        raise ConfigurationError("Multiplication norms are computed on the sine basis")
    if not 0 <= gamma < 0.25:
        raise DomainError(f"gamma must lie in [0, 1/4), got {gamma}")
    if not beta < -0.25 - gamma:
        raise DomainError(f"beta must be below -1/4 - gamma = {-0.25 - gamma}, got {beta}")
    if cutoff < 1:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    mus = _laplacian_eigenvalues(cutoff, theta)
    modes = np.arange(1, cutoff + 1)
    tensor = sine_product_tensor(x.basis.mode_numbers, modes, modes)
    # products[n, m] = <x e_m, e_n>
    products = np.einsum("j,jnm->nm", x.coefficients, tensor)
    inner_norms = (mus ** (2.0 * gamma)) @ products**2
    return float(np.sum(mus ** (2.0 * beta) * inner_norms))


def multiplication_norm_sq(
    operator: DiagonalOperator,
    gamma_x: float,
    gamma_u: float,
    beta: float,
    cutoff: int,
) -> float:
    """
    Squared operator norm of x -> M(x) from H_{gamma_x} to HS(H_{-gamma_u}; H_beta).

    The squared HS norm is the quadratic form
    sum_k mu_k^(2 gamma_u) ||x e_k||^2_{H_beta} = x^T K x; its supremum over the
    unit ball of H_{gamma_x} is the top eigenvalue of K relative to
    diag(mu^(2 gamma_x)). Everything is truncated at `cutoff` modes.

    Raises:
        DomainError: If beta + gamma_u >= -1/4 (the untruncated form diverges).
    """
    if operator.basis.kind is not BasisKind.DIRICHLET_SINE:
        raise ConfigurationError("Multiplication norms are computed on the sine basis")
    if beta + gamma_u >= -0.25:
        raise DomainError(
            f"Need beta + gamma_u < -1/4 for a Hilbert-Schmidt multiplier, got {beta + gamma_u}"
        )
    cutoff = min(cutoff, operator.basis.size)
    mus = operator.eigenvalues[:cutoff]
    modes = np.arange(1, cutoff + 1)
    tensor = sine_product_tensor(modes, modes, modes)
    weights = np.outer(mus ** (2.0 * beta), mus ** (2.0 * gamma_u))
    weighted = tensor * np.sqrt(weights)[None, :, :]
    flat = weighted.reshape(cutoff, -1)
    form = flat @ flat.T
    metric = np.diag(mus ** (2.0 * gamma_x))
    top = eigh(form, metric, eigvals_only=True)[-1]
    logger.debug(f"Multiplication norm at cutoff {cutoff}: {top:.6g}")
    return float(max(top, 0.0))
