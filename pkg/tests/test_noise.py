import numpy as np
import pytest
from numpy.testing import assert_array_equal

from app.noise.increments import IncrementBlock, NoisePlan, generate_increments, truncate
from app.utils.errors import ConfigurationError, ReferenceResolutionError


def test_increments_shape_and_scale():
    plan = NoisePlan.uniform(64, horizon=1.0, steps=400, seed=5)
    block = generate_increments(plan)
    assert block.increments.shape == (400, 64)
    # increments of variance h = 1/400
    variance = float(np.var(block.increments))
    assert variance == pytest.approx(1.0 / 400, rel=0.05)


def test_increments_are_deterministic():
    plan = NoisePlan.uniform(8, horizon=2.0, steps=10, seed=123, path_index=4)
    assert_array_equal(generate_increments(plan).increments, generate_increments(plan).increments)


def test_paths_and_seeds_give_different_streams():
    plan = NoisePlan.uniform(8, horizon=1.0, steps=10, seed=1)
    first = generate_increments(plan).increments
    assert not np.array_equal(first, generate_increments(plan.for_path(1)).increments)
    other_seed = NoisePlan.uniform(8, horizon=1.0, steps=10, seed=2)
    assert not np.array_equal(first, generate_increments(other_seed).increments)


def test_truncation_keeps_prefix_columns():
    plan = NoisePlan.uniform(16, horizon=1.0, steps=5, seed=9)
    block = generate_increments(plan)
    small = truncate(block, 4)
    assert_array_equal(small.increments, block.increments[:, :4])
    assert truncate(block, 16) is block


def test_truncation_level_bounds():
    block = generate_increments(NoisePlan.uniform(4, horizon=1.0, steps=3))
    with pytest.raises(ConfigurationError):
        truncate(block, 0)
    with pytest.raises(ReferenceResolutionError):
        truncate(block, 5)


def test_empty_plan_gives_empty_block():
    block = generate_increments(NoisePlan.uniform(0, horizon=1.0, steps=3))
    assert block.increments.shape == (3, 0)


def test_block_is_read_only():
    block = IncrementBlock(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        block.increments[0, 0] = 1.0


def test_nonuniform_grid_is_rejected():
    with pytest.raises(ConfigurationError):
        NoisePlan(4, np.array([0.0, 0.1, 0.3]))


def test_seed_must_fit_64_bits():
    with pytest.raises(ConfigurationError):
        NoisePlan.uniform(4, horizon=1.0, steps=2, seed=2**64)


def test_increment_moments_over_many_paths():
    plan = NoisePlan.uniform(8, horizon=1.0, steps=16, seed=2024)
    samples = np.concatenate([generate_increments(plan.for_path(p)).increments for p in range(10_000)])
    assert samples.shape == (160_000, 8)
    # every column is N(0, h) with h = 1/16 = 0.0625
    variances = samples.var(axis=0, ddof=1)
    assert np.all((variances >= 0.0594) & (variances <= 0.0656))
    standard_errors = np.sqrt(variances / samples.shape[0])
    assert np.all(np.abs(samples.mean(axis=0)) <= 4.0 * standard_errors)
