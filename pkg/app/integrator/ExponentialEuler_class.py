"""
Exponential Euler time stepping of mild solutions under truncated noise.

    X_{m+1} = S_h (X_m + h F(X_m) + B(X_m) P_n dW_m)

The propagator is exact, so the scheme reproduces the mild solution whenever
F and B vanish, and it is exact in distribution for drift-free additive noise.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.equations.EquationSpec_class import EquationSpec
from app.noise.increments import IncrementBlock, NoisePlan, generate_increments, truncate
from app.utils.errors import ConfigurationError, DomainError, ReferenceResolutionError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

HORIZON_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StepperConfig:
    steps: int = 256
    record_path: bool = False
    collocation_grid: Optional[int] = None

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError(f"Need at least one time step, got {self.steps}")


@dataclass(frozen=True)
class SimulationResult:
    terminal: np.ndarray
    path: Optional[np.ndarray] = None


def step(spec: EquationSpec, x: np.ndarray, increments: np.ndarray, n: int, h: float) -> np.ndarray:
    """
    One exponential Euler step.

    Args:
        spec: Equation to integrate.
        x: Current state.
        increments: Brownian increments of this step, at least n of them.
        n: Noise truncation level.
        h: Step size.

    Returns:
        S_h (x + h F(x) + B(x) P_n dW).
    """
    if h <= 0:
        raise DomainError(f"Step size must be positive, got {h}")
    update = x
    if not spec.drift.is_zero:
        update = update + h * spec.drift_term(x, n)
    if not spec.diffusion.is_zero:
        update = update + spec.diffusion_term(x, increments, n)
    return spec.propagate(update, h)


class ExponentialEuler:
    """Integrator bound to one equation and one time grid."""

    def __init__(self, spec: EquationSpec, config: StepperConfig):
        self.spec = spec
        self.config = config
        self.step_size = spec.horizon / config.steps
        spec.check_step(self.step_size)
        self.check_grid()

    def check_grid(self):
        """The configured collocation size must be the one the coefficients were built on."""
        expected = self.config.collocation_grid
        if expected is None:
            return
        for part in (self.spec.drift, self.spec.diffusion):
            grid = getattr(part, "grid", None)
            if grid is not None and grid.size != expected:
                raise ConfigurationError(
                    f"{type(part).__name__} of '{self.spec.name}' uses {grid.size} collocation points, "
                    f"stepper expects {expected}"
                )

    def check_plan(self, plan: NoisePlan):
        if abs(plan.horizon - self.spec.horizon) > HORIZON_TOLERANCE * max(1.0, self.spec.horizon):
            raise ConfigurationError(
                f"Noise plan horizon {plan.horizon} differs from equation horizon {self.spec.horizon}"
            )
        if plan.steps != self.config.steps:
            raise ConfigurationError(
                f"Noise plan has {plan.steps} steps, stepper expects {self.config.steps}"
            )

    def run(self, block: IncrementBlock, n: int) -> SimulationResult:
        """Integrate from the initial state with the first n columns of `block`."""
        if block.steps != self.config.steps:
            raise ConfigurationError(
                f"Increment block has {block.steps} steps, stepper expects {self.config.steps}"
            )
        resolution = self.spec.noise_resolution
        if resolution is not None and n > resolution:
            raise ReferenceResolutionError(
                f"Level {n} exceeds the {resolution} noise modes of '{self.spec.name}'"
            )
        # level 0 is the noise-free flow
        increments = truncate(block, n).increments if n > 0 else np.zeros((block.steps, 0))
        x = np.array(self.spec.initial, dtype=float)
        path = None
        if self.config.record_path:
            path = np.empty((self.config.steps + 1, x.size))
            path[0] = x
        for m in range(self.config.steps):
            x = step(self.spec, x, increments[m], n, self.step_size)
            if path is not None:
                path[m + 1] = x
        return SimulationResult(x, path)

    def simulate(self, plan: NoisePlan, n: int) -> SimulationResult:
        self.check_plan(plan)
        return self.run(generate_increments(plan), n)

    def __repr__(self):
        return f"ExponentialEuler(equation={self.spec.name}, steps={self.config.steps})"


def simulate_terminal(spec: EquationSpec, plan: NoisePlan, n: int, config: StepperConfig) -> np.ndarray:
    """
    Terminal state X^n_T of one path.

    The result depends only on (spec, seed, path_index, n, steps); runs at
    different levels of the same plan share their increments.
    """
    return ExponentialEuler(spec, config).simulate(plan, n).terminal
