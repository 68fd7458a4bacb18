import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.coefficients.diffusion import (
    ColumnSumTail,
    ConstantDiffusion,
    HurwitzTail,
    PointwiseAffineDiffusion,
    PowerLawTail,
    RankOneIntegralDiffusion,
    apply_diffusion,
    column_norms_sq,
    tail_ratio_bound,
)
from app.coefficients.drift import (
    AffineDrift,
    NemytskiiDrift,
    NoArbitrageDrift,
    SineNonlinearity,
    TanhNonlinearity,
    ZeroDrift,
)
from app.coefficients.lambdas import ExplicitLambdas, PowerLawLambdas
from app.coefficients.multiplication import multiplication_hs_norm, multiplication_norm_sq
from app.equations.fourier_equations import make_airy
from app.equations.wave import make_wave
from app.spectral.bases import Basis, CollocationGrid
from app.spectral.fields import SpectralField
from app.spectral.operators import DiagonalOperator, InterpolationSpaceNorm
from app.utils.errors import ConfigurationError, DomainError


def test_diagonal_constant_diffusion_apply_and_tail():
    diffusion = ConstantDiffusion.from_diagonal(np.array([1.0, 0.5, 0.25]), tail_remainder=0.01)
    increments = np.array([2.0, 4.0, 8.0])
    assert_allclose(diffusion.apply(np.zeros(3), increments, 2), [2.0, 2.0, 0.0])
    assert diffusion.tail(1) == pytest.approx(0.25 + 0.0625 + 0.01)
    assert diffusion.tail(3) == pytest.approx(0.01)
    assert tail_ratio_bound(diffusion, None, 1) == pytest.approx(diffusion.tail(1))


def test_row_constant_diffusion_apply():
    rows = np.array([[1.0, 2.0], [3.0, 4.0]])
    diffusion = ConstantDiffusion(rows=rows)
    assert_allclose(diffusion.apply(np.zeros(2), np.array([1.0, -1.0]), 2), [-2.0, -2.0])
    assert_allclose(diffusion.apply(np.zeros(2), np.array([1.0, -1.0]), 1), [1.0, 2.0])
    assert_allclose(column_norms_sq(diffusion, np.zeros(2), 3), [5.0, 25.0, 0.0])


def test_constant_diffusion_needs_one_form():
    with pytest.raises(ConfigurationError):
        ConstantDiffusion()


def test_apply_diffusion_needs_enough_increments():
    diffusion = ConstantDiffusion.from_diagonal(np.ones(4))
    with pytest.raises(DomainError):
        apply_diffusion(diffusion, np.zeros(4), np.ones(2), 3)


def test_tail_ratio_bound_needs_positive_level():
    diffusion = ConstantDiffusion.from_diagonal(np.ones(2))
    with pytest.raises(DomainError):
        tail_ratio_bound(diffusion, None, 0)


def test_rank_one_column_norms_sum_to_state_norm():
    basis = Basis.dirichlet_sine(6)
    diffusion = RankOneIntegralDiffusion(basis)
    x = np.array([0.5, -1.0, 0.0, 2.0, 0.1, 0.3])
    assert np.sum(diffusion.column_norms_sq(x, 6)) == pytest.approx(float(x @ x))
    applied = diffusion.apply(x, np.ones(6), 6)
    assert_allclose(applied, float(np.sum(x)) * basis.constant_one())


def test_rank_one_tail_ratio_bounds():
    basis = Basis.dirichlet_sine(8)
    diffusion = RankOneIntegralDiffusion(basis)
    laplacian = DiagonalOperator.dirichlet_laplacian(basis, theta=1.0)
    assert tail_ratio_bound(diffusion, InterpolationSpaceNorm(laplacian, 0.0), 4) == 1.0
    delta = 0.25
    bound = tail_ratio_bound(diffusion, InterpolationSpaceNorm(laplacian, delta), 4)
    assert bound == pytest.approx((math.pi**2 * 16) ** (-2 * delta))


def test_pointwise_diffusion_needs_grid_when_multiplicative():
    with pytest.raises(ConfigurationError):
        PointwiseAffineDiffusion(Basis.dirichlet_sine(4), b0=1.0, b1=0.5)


def test_pointwise_additive_path_scales_noise():
    basis = Basis.dirichlet_sine(4)
    diffusion = PointwiseAffineDiffusion(basis, b0=2.0)
    increments = np.array([1.0, -1.0, 0.5, 3.0])
    assert_allclose(diffusion.apply(np.zeros(4), increments, 3), [2.0, -2.0, 1.0, 0.0])


def test_pointwise_multiplicative_matches_additive_at_zero_state():
    basis = Basis.dirichlet_sine(8)
    grid = CollocationGrid.for_basis(basis)
    diffusion = PointwiseAffineDiffusion(basis, b0=1.5, b1=0.7, grid=grid)
    increments = np.random.default_rng(2).standard_normal(8)
    assert_allclose(diffusion.apply(np.zeros(8), increments, 8), 1.5 * increments, atol=1e-12)
    assert_allclose(diffusion.column_norms_sq(np.zeros(8), 8), np.full(8, 2.25), atol=1e-12)


def test_complex_noise_columns():
    basis = Basis.fourier_torus(2)
    diffusion = PointwiseAffineDiffusion(basis, b0=1.0, complex_noise=True)
    assert diffusion.noise_columns == 10
    field = diffusion.noise_field(np.arange(10, dtype=float), 10)
    assert field[1] == pytest.approx(2.0 + 3.0j)


def test_tail_models():
    assert PowerLawTail(2.0, -0.5)(4) == pytest.approx(1.0)
    assert HurwitzTail(1.0, 2.0)(0) == pytest.approx(math.pi**2 / 6)
    tail = ColumnSumTail(np.array([1.0, 2.0, 3.0]), remainder=0.5, factor=2.0)
    assert tail(1) == pytest.approx(11.0)
    assert tail(5) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        HurwitzTail(1.0, 1.0)


def test_affine_and_zero_drift():
    assert ZeroDrift().is_zero
    drift = AffineDrift(np.array([1.0, 0.0]), 2.0)
    assert_allclose(drift(np.array([1.0, 1.0])), [3.0, 2.0])
    assert drift.linear_bound == 2.0


def test_field_valued_affine_drift_needs_grid():
    with pytest.raises(ConfigurationError):
        AffineDrift(np.zeros(3), np.ones(3))


def test_nemytskii_drift_linearizes_for_small_states():
    basis = Basis.dirichlet_sine(8)
    drift = NemytskiiDrift(SineNonlinearity(1.0, 1.0), CollocationGrid.for_basis(basis))
    u = 1e-4 * np.eye(8)[0]
    assert_allclose(drift(u), u, atol=1e-11)


def test_nonlinearity_derivative_bounds():
    assert SineNonlinearity(2.0, 3.0).first_derivative_bound == pytest.approx(6.0)
    assert SineNonlinearity(2.0, 3.0).second_derivative_bound == pytest.approx(18.0)
    samples = np.linspace(-5.0, 5.0, 20001)
    second = -2.0 * np.tanh(samples) / np.cosh(samples) ** 2
    assert TanhNonlinearity(1.0).second_derivative_bound == pytest.approx(np.max(np.abs(second)), rel=1e-6)


def test_no_arbitrage_drift_of_constant_volatility():
    maturities = np.linspace(0.0, 2.0, 21)
    rows = np.vstack([np.full(21, 0.3), np.full(21, 0.1)])
    drift = NoArbitrageDrift(rows, spacing=0.1)
    assert_allclose(drift.curve(1), 0.09 * maturities, atol=1e-14)
    assert_allclose(drift.curve(None), 0.1 * maturities, atol=1e-14)
    assert_allclose(drift(np.zeros(21), 1), drift.curve(1))
    full = NoArbitrageDrift(rows, spacing=0.1, mode="full")
    assert_allclose(full(np.zeros(21), 1), drift.curve(None))


def test_no_arbitrage_drift_mode_is_checked():
    with pytest.raises(ConfigurationError):
        NoArbitrageDrift(np.ones((1, 3)), 0.1, mode="partial")


def test_power_law_lambdas():
    lambdas = PowerLawLambdas(1.0)
    assert_allclose(lambdas.values(3), [1.0, 0.5, 1.0 / 3.0])
    assert lambdas.tail_sq(0) == pytest.approx(math.pi**2 / 6)
    assert lambdas.tail_sq(2) == pytest.approx(math.pi**2 / 6 - 1.25)
    with pytest.raises(DomainError):
        PowerLawLambdas(0.5)


def test_explicit_lambdas():
    lambdas = ExplicitLambdas([1.0, 0.5])
    assert_allclose(lambdas.values(4), [1.0, 0.5, 0.0, 0.0])
    assert lambdas.tail_sq(1) == pytest.approx(0.25)
    assert lambdas.tail_sq(5) == 0.0


def test_hs_norm_domain_checks():
    field = SpectralField.mode(Basis.dirichlet_sine(4), 0)
    with pytest.raises(DomainError):
        multiplication_hs_norm(field, 0.3, -1.0, 8)
    with pytest.raises(DomainError):
        multiplication_hs_norm(field, 0.0, -0.2, 8)


def test_hs_norm_grows_with_cutoff():
    field = SpectralField.constant_one(Basis.dirichlet_sine(16))
    values = [multiplication_hs_norm(field, 0.0, -0.5, cutoff) for cutoff in (8, 16, 32)]
    assert values[0] <= values[1] <= values[2]


def test_multiplication_norm_dominates_single_direction():
    basis = Basis.dirichlet_sine(16)
    laplacian = DiagonalOperator.dirichlet_laplacian(basis)
    top = multiplication_norm_sq(laplacian, 0.0, 0.0, -0.5, 16)
    first_mode = multiplication_hs_norm(SpectralField.mode(basis, 0), 0.0, -0.5, 16)
    assert top >= first_mode * (1.0 - 1e-12)
    with pytest.raises(DomainError):
        multiplication_norm_sq(laplacian, 0.0, 0.3, -0.5, 16)


def v_ball_states(space, count, radius, seed):
    """`count` states spread over the ball of the given radius in `space`."""
    rng = np.random.default_rng(seed)
    size = space.weights.size
    for _ in range(count):
        direction = rng.standard_normal(size) / np.sqrt(space.weights)
        yield direction * radius * rng.uniform() / space.norm(direction)


def assert_tail_ratio_holds(diffusion, space, n_ref, levels, seed):
    for x in v_ball_states(space, 1000, 5.0, seed):
        columns = diffusion.column_norms_sq(x, n_ref)
        scale = 1.0 + space.norm_sq(x)
        for n in levels:
            assert np.sum(columns[n:]) <= scale * tail_ratio_bound(diffusion, space, n) + 1e-12


def test_constant_diffusion_tail_ratio_is_the_tail():
    lambdas = PowerLawLambdas(1.0)
    diffusion = ConstantDiffusion.from_diagonal(lambdas.values(16), tail_remainder=lambdas.tail_sq(16))
    space = InterpolationSpaceNorm(DiagonalOperator.identity(Basis.canonical(16)), 0.0)
    assert_tail_ratio_holds(diffusion, space, 16, (1, 4, 8, 15), seed=21)


def test_rank_one_tail_ratio_holds_on_v_ball():
    basis = Basis.dirichlet_sine(16)
    laplacian = DiagonalOperator.dirichlet_laplacian(basis, theta=1.0)
    diffusion = RankOneIntegralDiffusion(basis)
    for delta in (0.0, 0.25, 0.5):
        assert_tail_ratio_holds(diffusion, InterpolationSpaceNorm(laplacian, delta), 16, (1, 4, 8, 15), seed=22)


def test_wave_multiplicative_tail_ratio_holds_on_v_ball():
    spec = make_wave(1.0, 0.5, 0.0, None, 1.0, 0.5, 0.5, np.zeros(16), np.zeros(16), 1.0, 16)
    assert_tail_ratio_holds(spec.diffusion, spec.tail_space, 16, (1, 4, 8, 12), seed=23)


def test_torus_multiplicative_tail_ratio_holds_on_v_ball():
    spec = make_airy(8, np.zeros(17), 1.0, b0=1.0, b1=0.5)
    assert_tail_ratio_holds(spec.diffusion, spec.tail_space, 17, (1, 4, 9, 16), seed=24)
