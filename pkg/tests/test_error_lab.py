import math
from types import SimpleNamespace

import numpy as np
import pytest

from app.coefficients.lambdas import ExplicitLambdas, PowerLawLambdas
from app.equations.EquationSpec_class import CoefficientNorms, DiagonalStateNorm
from app.equations.diagonal import make_diagonal
from app.error_lab.ErrorEstimator_class import REPORT_COLUMNS, ErrorEstimator, estimate_errors
from app.error_lab.constants import bound_constants
from app.error_lab.functionals import GaussianBell, SmoothLinear, make_functional
from app.error_lab.gaussian_oracle import gaussian_oracle, log_tail, sharpness_ratios, weak_ratio
from app.error_lab.rates import fit_rate
from app.integrator.ExponentialEuler_class import StepperConfig
from app.noise.increments import NoisePlan, generate_increments
from app.utils.errors import ConfigurationError, DomainError, ReferenceResolutionError

SINH_PRODUCT = math.sqrt(math.pi / math.sinh(math.pi))


def test_gaussian_bell():
    functional = GaussianBell(DiagonalStateNorm(np.ones(2)))
    assert functional(np.zeros(2)) == 1.0
    assert functional(np.array([1.0, 1.0])) == pytest.approx(math.exp(-1.0))
    assert functional.c2_norm == pytest.approx(2.0 + math.exp(-0.5))


def test_smooth_linear_uses_h_inner_product():
    functional = SmoothLinear(DiagonalStateNorm(np.array([4.0, 1.0])), 2)
    assert functional(np.array([math.pi / 4.0, 3.0])) == pytest.approx(1.0)
    assert functional.c2_norm == pytest.approx(2.0)


def test_make_functional():
    spec = make_diagonal(PowerLawLambdas(1.0), 4)
    assert make_functional("gaussian_bell", spec).name == "gaussian_bell"
    assert make_functional("smooth_linear", spec).direction.size == 4
    with pytest.raises(ConfigurationError):
        make_functional("quartic", spec)


def test_fit_rate_recovers_power_law():
    levels = [4, 8, 16, 32]
    fit = fit_rate(levels, [3.0 * n**-1.5 for n in levels])
    assert fit.slope == pytest.approx(-1.5)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.predict(64) == pytest.approx(3.0 * 64**-1.5)


def test_fit_rate_drops_nonpositive_errors(caplog):
    fit = fit_rate([1, 2, 4, 8], [1.0, 0.5, 0.0, 0.125])
    assert fit.levels == (1, 2, 8)
    assert fit.slope == pytest.approx(-1.0)
    assert "Dropped 1" in caplog.text


def test_fit_rate_needs_three_points():
    with pytest.raises(ConfigurationError):
        fit_rate([1, 2, 4], [1.0, -0.5, 0.25])
    with pytest.raises(ConfigurationError):
        fit_rate([1, 2], [1.0, 0.5, 0.25])


def test_bound_constants_with_zero_coefficients():
    constants = bound_constants(CoefficientNorms(), 2.0)
    assert constants.c3 == pytest.approx(1.0)
    assert constants.c4 == 0.0
    assert constants.c1 == pytest.approx(1.0)
    assert constants.c2 == 0.0
    assert constants.c == pytest.approx(1.0)
    assert constants.apriori == 0.0


def test_bound_constants_exponential_growth():
    norms = CoefficientNorms(drift_c1=1.0, diffusion_c1=1.0)
    assert bound_constants(norms, 1.0).c3 == pytest.approx(4.4816891)


def test_c2_tends_to_initial_norm():
    norms = CoefficientNorms(initial_v=2.0, drift_lip_v=1.0, diffusion_lip_v=1.0)
    assert bound_constants(norms, 1e-12).c2 == pytest.approx(2.0, rel=1e-5)


def test_bound_constants_reject_bad_input():
    with pytest.raises(ConfigurationError):
        bound_constants(CoefficientNorms(), 0.0)
    with pytest.raises(ConfigurationError):
        bound_constants(CoefficientNorms(drift_c1=-1.0), 1.0)


def test_oracle_single_mode():
    assert gaussian_oracle(ExplicitLambdas([1.0]), 1) == pytest.approx(0.70710678)
    assert gaussian_oracle(ExplicitLambdas([1.0])) == pytest.approx(0.70710678)
    assert gaussian_oracle(ExplicitLambdas([1.0]), 0) == 1.0


def test_oracle_untruncated_power_law():
    lambdas = PowerLawLambdas(1.0)
    assert gaussian_oracle(lambdas, math.inf) == pytest.approx(SINH_PRODUCT, rel=1e-10)
    assert gaussian_oracle(lambdas) == pytest.approx(0.5215640, rel=1e-6)


def test_oracle_rejects_negative_level():
    with pytest.raises(DomainError):
        gaussian_oracle(PowerLawLambdas(1.0), -1)


def test_log_tail_is_below_square_tail():
    lambdas = PowerLawLambdas(1.0)
    for n in (1, 16, 256):
        assert 0 < log_tail(lambdas, n) <= lambdas.tail_sq(n)


def test_weak_ratio_is_at_most_half():
    lambdas = PowerLawLambdas(1.0)
    for n in range(1, 65):
        assert 0 < weak_ratio(lambdas, n) <= 0.5


def test_weak_ratio_of_empty_tail():
    assert weak_ratio(ExplicitLambdas([1.0, 0.5]), 2) is None


def test_sharpness_ratios_without_report():
    rows = sharpness_ratios(PowerLawLambdas(2.0), [1, 4])
    assert [row.n for row in rows] == [1, 4]
    assert all(row.strong_ratio == 1.0 for row in rows)
    assert rows[0].tail > rows[1].tail


def test_sharpness_ratios_with_report():
    lambdas = ExplicitLambdas([1.0, 0.5, 0.25])
    report = SimpleNamespace(n_ref=3, rows=[SimpleNamespace(n=1, strong_sq=0.3125 * 0.9)])
    rows = sharpness_ratios(lambdas, [1, 2], report)
    assert rows[0].strong_ratio == pytest.approx(0.9)
    assert rows[1].strong_ratio is None


def diagonal_run(levels, paths=64, workers=1, seed=7):
    spec = make_diagonal(PowerLawLambdas(1.0), 32)
    plan = NoisePlan.uniform(32, horizon=1.0, steps=1, seed=seed)
    functional = GaussianBell(spec.h_norm)
    return spec, plan, estimate_errors(spec, levels, paths, functional, plan, workers=workers)


def test_estimator_matches_direct_tail_sums():
    spec, plan, report = diagonal_run([2, 4, 8, 32])
    lambdas = PowerLawLambdas(1.0).values(32)
    squares = np.stack(
        [(lambdas * generate_increments(plan.for_path(p)).increments[0]) ** 2 for p in range(64)]
    )
    for n in (2, 4, 8):
        expected = squares[:, n:].sum(axis=1)
        row = report.row(n)
        assert row.strong_sq == pytest.approx(expected.mean(), rel=1e-12)
        assert row.strong_se == pytest.approx(expected.std(ddof=1) / 8.0, rel=1e-10)
    assert report.row(32).strong_sq == 0.0
    assert report.row(32).weak == 0.0


def test_estimator_bounds_and_fits():
    spec, plan, report = diagonal_run([2, 4, 8, 32])
    bias = spec.reference_bias(32)
    assert report.reference_bias == pytest.approx(bias)
    for row in report.rows:
        assert row.tail_ratio == pytest.approx(PowerLawLambdas(1.0).tail_sq(row.n))
        assert row.bound == pytest.approx(report.constants.c * row.tail_ratio + bias)
    assert report.strong_fit is not None
    assert report.strong_fit.levels == (2, 4, 8)
    assert report.strong_fit.slope < 0
    assert [sorted(row) for row in report.as_rows()] == [sorted(REPORT_COLUMNS)] * 4


def test_estimator_without_enough_levels_has_no_fit():
    _, _, report = diagonal_run([4, 8])
    assert report.strong_fit is None
    assert report.as_rows()[0]["strong_slope"] is None


def test_worker_count_does_not_change_estimates():
    _, _, sequential = diagonal_run([4, 16], paths=16)
    _, _, parallel = diagonal_run([4, 16], paths=16, workers=2)
    assert sequential.as_rows() == parallel.as_rows()


def test_estimator_rejects_invalid_requests():
    spec = make_diagonal(PowerLawLambdas(1.0), 8)
    plan = NoisePlan.uniform(8, horizon=1.0, steps=1)
    estimator = ErrorEstimator(spec, StepperConfig(steps=1), GaussianBell(spec.h_norm))
    with pytest.raises(ConfigurationError):
        estimator.estimate_errors([4], 1, plan)
    with pytest.raises(ConfigurationError):
        estimator.estimate_errors([], 4, plan)
    with pytest.raises(ConfigurationError):
        estimator.estimate_errors([0], 4, plan)
    with pytest.raises(ReferenceResolutionError):
        estimator.estimate_errors([9], 4, plan)
    with pytest.raises(ConfigurationError):
        ErrorEstimator(spec, StepperConfig(steps=1), GaussianBell(spec.h_norm), workers=0)
