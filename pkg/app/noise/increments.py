"""
Brownian increments of the truncated cylindrical Wiener process.

Every path owns a Philox counter-based stream keyed by (seed, path_index), so a
path's increments never depend on which worker draws them or in which order.
Normals come from the inverse normal CDF applied to 53-bit uniforms
u = k * 2**-53 + 2**-54, which keeps u strictly inside (0, 1).
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from app.utils.errors import ConfigurationError, ReferenceResolutionError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

UNIFORM_GRID_TOLERANCE = 1e-14
_TWO_POW_53 = 2.0**-53
_TWO_POW_54 = 2.0**-54
_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class NoisePlan:
    """Which increments a path sees: reference resolution, time grid and stream key."""

    mode_count_ref: int
    time_grid: np.ndarray = field(repr=False)
    seed: int = 0
    path_index: int = 0

    def __post_init__(self):
        grid = np.array(self.time_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0:
            raise ConfigurationError("Time grid must be a 1-d array starting at 0")
        if self.mode_count_ref < 0:
            raise ConfigurationError(
                f"Reference mode count must be nonnegative, got {self.mode_count_ref}"
            )
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ConfigurationError(f"Seed must fit in 64 unsigned bits, got {self.seed}")
        if not 0 <= self.path_index < _SEED_LIMIT:
            raise ConfigurationError(f"Invalid path index {self.path_index}")
        if grid.size > 1:
            steps = np.diff(grid)
            if np.any(steps <= 0):
                raise ConfigurationError("Time grid must be strictly increasing")
            spread = (steps.max() - steps.min()) / steps.mean()
            if spread > UNIFORM_GRID_TOLERANCE:
                raise ConfigurationError(
                    f"Only uniform time grids are supported (relative spread {spread:.3g})"
                )
        grid.setflags(write=False)
        object.__setattr__(self, "time_grid", grid)

    @classmethod
    def uniform(
        cls, mode_count_ref: int, horizon: float, steps: int, seed: int = 0, path_index: int = 0
    ) -> "NoisePlan":
        """Plan on the grid t_m = m * horizon / steps."""
        if steps < 0 or horizon <= 0:
            raise ConfigurationError(
                f"Need steps >= 0 and a positive horizon, got {steps} and {horizon}"
            )
        grid = horizon * np.arange(steps + 1) / steps if steps else np.zeros(1)
        return cls(mode_count_ref, grid, seed, path_index)

    @property
    def steps(self) -> int:
        return self.time_grid.size - 1

    @property
    def horizon(self) -> float:
        return float(self.time_grid[-1])

    @property
    def step_size(self) -> float:
        return self.horizon / self.steps if self.steps else 0.0

    def for_path(self, path_index: int) -> "NoisePlan":
        return replace(self, path_index=path_index)


@dataclass(frozen=True)
class IncrementBlock:
    """Read-only M x n matrix; entry (m, k) is the increment of beta_k over step m."""

    increments: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.increments, dtype=float)
        if values.ndim != 2:
            raise ConfigurationError(f"Increment block must be 2-d, got shape {values.shape}")
        if values.flags.writeable:
            values = values.copy()
            values.setflags(write=False)
        object.__setattr__(self, "increments", values)

    @property
    def steps(self) -> int:
        return self.increments.shape[0]

    @property
    def mode_count(self) -> int:
        return self.increments.shape[1]


def generate_increments(plan: NoisePlan) -> IncrementBlock:
    """
    Draw the reference-resolution increments of one path.

    Args:
        plan: Grid, reference mode count and stream key.

    Returns:
        Block of shape (steps, mode_count_ref), drawn time-major; an empty block
        when either dimension is zero.
    """
    shape = (plan.steps, plan.mode_count_ref)
    if plan.steps == 0 or plan.mode_count_ref == 0:
        return IncrementBlock(np.zeros(shape))
    bit_generator = np.random.Philox(key=np.array([plan.seed, plan.path_index], dtype=np.uint64))
    raw = bit_generator.random_raw(plan.steps * plan.mode_count_ref)
    uniforms = (raw >> np.uint64(11)).astype(float) * _TWO_POW_53 + _TWO_POW_54
    normals = ndtri(uniforms).reshape(shape)
    logger.debug(f"Drew {shape} increments for path {plan.path_index}")
    return IncrementBlock(normals * math.sqrt(plan.step_size))


def truncate(block: IncrementBlock, n: int) -> IncrementBlock:
    """
    Keep the first n mode columns (the increments of P_n W).

    Raises:
        ConfigurationError: If n < 1.
        ReferenceResolutionError: If n exceeds the block's resolution.
    """
    if n < 1:
        raise ConfigurationError(f"Truncation level must be at least 1, got {n}")
    if n > block.mode_count:
        raise ReferenceResolutionError(
            f"Level {n} exceeds the reference resolution {block.mode_count}"
        )
    if n == block.mode_count:
        return block
    return IncrementBlock(block.increments[:, :n])
