import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from app.coefficients.lambdas import PowerLawLambdas
from app.equations.diagonal import make_diagonal
from app.equations.wave import make_wave
from app.integrator.ExponentialEuler_class import ExponentialEuler, StepperConfig, simulate_terminal, step
from app.noise.increments import IncrementBlock, NoisePlan, generate_increments
from app.utils.errors import ConfigurationError, DomainError, ReferenceResolutionError


def diagonal_spec(size=8):
    return make_diagonal(PowerLawLambdas(1.0), size)


def test_stepper_needs_a_step():
    with pytest.raises(ConfigurationError):
        StepperConfig(steps=0)


def test_step_rejects_nonpositive_size():
    spec = diagonal_spec()
    with pytest.raises(DomainError):
        step(spec, np.zeros(8), np.zeros(8), 8, 0.0)


def test_additive_diagonal_terminal_is_sum_of_increments():
    spec = diagonal_spec()
    block = generate_increments(NoisePlan.uniform(8, horizon=1.0, steps=4, seed=11))
    terminal = ExponentialEuler(spec, StepperConfig(steps=4)).run(block, 5).terminal
    lambdas = PowerLawLambdas(1.0).values(8)
    expected = lambdas * block.increments.sum(axis=0)
    expected[5:] = 0.0
    assert_allclose(terminal, expected, atol=1e-14)


def test_levels_share_increments():
    spec = diagonal_spec()
    block = generate_increments(NoisePlan.uniform(8, horizon=1.0, steps=3, seed=2))
    integrator = ExponentialEuler(spec, StepperConfig(steps=3))
    coarse = integrator.run(block, 4).terminal
    fine = integrator.run(block, 8).terminal
    assert_array_equal(coarse[:4], fine[:4])
    assert not np.any(coarse[4:])


def test_level_zero_is_noise_free_flow():
    modes = 8
    position = np.random.default_rng(6).standard_normal(modes)
    spec = make_wave(1.0, 0.5, 0.0, None, 1.0, 0.0, 0.5, position, np.zeros(modes), 1.0, modes)
    block = generate_increments(NoisePlan.uniform(modes, horizon=1.0, steps=32, seed=1))
    terminal = ExponentialEuler(spec, StepperConfig(steps=32)).run(block, 0).terminal
    assert_allclose(terminal, spec.propagate(spec.initial, 1.0), atol=1e-11)


def test_block_and_level_checks():
    spec = diagonal_spec()
    integrator = ExponentialEuler(spec, StepperConfig(steps=2))
    with pytest.raises(ConfigurationError):
        integrator.run(IncrementBlock(np.zeros((3, 8))), 8)
    with pytest.raises(ReferenceResolutionError):
        integrator.run(IncrementBlock(np.zeros((2, 16))), 9)


def test_plan_must_match_equation():
    spec = diagonal_spec()
    integrator = ExponentialEuler(spec, StepperConfig(steps=2))
    with pytest.raises(ConfigurationError):
        integrator.simulate(NoisePlan.uniform(8, horizon=2.0, steps=2), 8)
    with pytest.raises(ConfigurationError):
        integrator.simulate(NoisePlan.uniform(8, horizon=1.0, steps=4), 8)


def test_recorded_path():
    spec = diagonal_spec()
    result = ExponentialEuler(spec, StepperConfig(steps=5, record_path=True)).simulate(
        NoisePlan.uniform(8, horizon=1.0, steps=5, seed=3), 8
    )
    assert result.path.shape == (6, 8)
    assert_array_equal(result.path[0], spec.initial)
    assert_array_equal(result.path[-1], result.terminal)


def test_simulate_terminal_is_reproducible():
    spec = diagonal_spec()
    plan = NoisePlan.uniform(8, horizon=1.0, steps=4, seed=99, path_index=3)
    config = StepperConfig(steps=4)
    first = simulate_terminal(spec, plan, 6, config)
    assert_array_equal(first, simulate_terminal(spec, plan, 6, config))
    assert_array_equal(first, ExponentialEuler(spec, config).run(generate_increments(plan), 6).terminal)
