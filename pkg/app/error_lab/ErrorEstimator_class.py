"""
Coupled Monte Carlo estimation of strong and weak noise-truncation errors.

Every path is simulated once at the reference level n_ref and once per level n
from the same increment block, so X^{n_ref} - X^n is a coupled difference.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.coefficients.diffusion import tail_ratio_bound
from app.equations.EquationSpec_class import EquationSpec
from app.error_lab.constants import BoundConstants, bound_constants
from app.error_lab.rates import RateFit, fit_rate
from app.integrator.ExponentialEuler_class import ExponentialEuler, StepperConfig
from app.noise.increments import NoisePlan, generate_increments
from app.utils.errors import ConfigurationError, ReferenceResolutionError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "equation",
    "n",
    "paths",
    "strong_sq",
    "strong_se",
    "weak",
    "weak_se",
    "phi_mean",
    "phi_se",
    "tail_ratio",
    "bound",
    "strong_slope",
    "weak_slope",
]


@dataclass(frozen=True)
class PathTask:
    spec: EquationSpec
    config: StepperConfig
    plan: NoisePlan
    levels: Tuple[int, ...]
    n_ref: int
    functional: object


@dataclass(frozen=True)
class PathSample:
    strong_sq: np.ndarray
    phi: np.ndarray
    phi_ref: float


def simulate_path(task: PathTask) -> PathSample:
    """Reference and per-level terminal states of one path, reduced to errors."""
    integrator = ExponentialEuler(task.spec, task.config)
    block = generate_increments(task.plan)
    reference = integrator.run(block, task.n_ref).terminal
    phi_ref = task.functional(reference)
    strong_sq = np.empty(len(task.levels))
    phi = np.empty(len(task.levels))
    for i, n in enumerate(task.levels):
        terminal = reference if n == task.n_ref else integrator.run(block, n).terminal
        strong_sq[i] = task.spec.h_norm.norm_sq(reference - terminal)
        phi[i] = task.functional(terminal)
    logger.debug(f"Path {task.plan.path_index} of '{task.spec.name}' done")
    return PathSample(strong_sq, phi, phi_ref)


@dataclass(frozen=True)
class LevelEstimate:
    n: int
    paths: int
    strong_sq: float
    strong_se: float
    weak: float
    weak_se: float
    phi_mean: float
    phi_se: float
    tail_ratio: Optional[float]
    bound: Optional[float]


@dataclass(frozen=True)
class ErrorReport:
    equation: str
    seed: int
    n_ref: int
    paths: int
    steps: int
    functional: str
    functional_norm: float
    rows: Tuple[LevelEstimate, ...]
    constants: BoundConstants
    reference_bias: Optional[float] = None
    strong_fit: Optional[RateFit] = None
    weak_fit: Optional[RateFit] = None
    parameters: Dict[str, float] = field(default_factory=dict)

    def row(self, n: int) -> LevelEstimate:
        for estimate in self.rows:
            if estimate.n == n:
                return estimate
        raise KeyError(f"No estimate for level {n}")

    def as_rows(self) -> List[Dict[str, object]]:
        """One dict per level, keyed by REPORT_COLUMNS."""
        strong_slope = self.strong_fit.slope if self.strong_fit else None
        weak_slope = self.weak_fit.slope if self.weak_fit else None
        return [
            {
                "equation": self.equation,
                "n": estimate.n,
                "paths": estimate.paths,
                "strong_sq": estimate.strong_sq,
                "strong_se": estimate.strong_se,
                "weak": estimate.weak,
                "weak_se": estimate.weak_se,
                "phi_mean": estimate.phi_mean,
                "phi_se": estimate.phi_se,
                "tail_ratio": estimate.tail_ratio,
                "bound": estimate.bound,
                "strong_slope": strong_slope,
                "weak_slope": weak_slope,
            }
            for estimate in self.rows
        ]


def _mean_and_se(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    count = samples.shape[0]
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / math.sqrt(count)


def _try_fit(levels: Sequence[int], errors: Sequence[float], label: str) -> Optional[RateFit]:
    try:
        return fit_rate(levels, errors)
    except ConfigurationError as e:
        logger.warning(f"No {label} rate: {e}")
        return None


class ErrorEstimator:
    def __init__(self, spec: EquationSpec, config: StepperConfig, functional, workers: int = 1):
        """
        Args:
            spec: Equation under study.
            config: Time stepping configuration shared by every level.
            functional: Test functional phi with a `c2_norm`.
            workers: Worker processes; 1 runs the paths in this process.
        """
        if workers < 1:
            raise ConfigurationError(f"Worker count must be positive, got {workers}")
        self.spec = spec
        self.config = config
        self.functional = functional
        self.workers = workers

    def _check_levels(self, levels: Sequence[int], paths: int, n_ref: int):
        if paths < 2:
            raise ConfigurationError(f"Standard errors need at least 2 paths, got {paths}")
        if not levels:
            raise ConfigurationError("At least one truncation level is required")
        for n in levels:
            if n < 1:
                raise ConfigurationError(f"Truncation levels must be positive, got {n}")
            if n > n_ref:
                raise ReferenceResolutionError(f"Level {n} exceeds the reference level {n_ref}")

    def _run_paths(self, tasks: List[PathTask]) -> List[PathSample]:
        if self.workers == 1:
            return [simulate_path(task) for task in tasks]
        chunksize = max(1, len(tasks) // (4 * self.workers))
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(simulate_path, tasks, chunksize=chunksize))

    def estimate_errors(self, levels: Sequence[int], paths: int, plan: NoisePlan) -> ErrorReport:
        """
        Estimate strong and weak errors at every level.

        Args:
            levels: Truncation levels, each at most plan.mode_count_ref.
            paths: Number of Monte Carlo paths P >= 2.
            plan: Template plan; path p uses plan.for_path(p).

        Returns:
            ErrorReport with per-level means, standard errors and bounds.

        Raises:
            ConfigurationError: If P < 2 or the levels are invalid.
            ReferenceResolutionError: If a level exceeds n_ref.
        """
        spec = self.spec
        n_ref = plan.mode_count_ref
        levels = tuple(int(n) for n in levels)
        self._check_levels(levels, paths, n_ref)
        ExponentialEuler(spec, self.config).check_plan(plan)

        logger.info(
            f"Estimating errors of '{spec.name}': levels={list(levels)}, n_ref={n_ref}, "
            f"paths={paths}, steps={self.config.steps}, workers={self.workers}"
        )
        tasks = [
            PathTask(spec, self.config, plan.for_path(p), levels, n_ref, self.functional)
            for p in range(paths)
        ]
        try:
            samples = self._run_paths(tasks)
        except Exception as e:
            logger.error(f"Path simulation of '{spec.name}' failed: {e}", exc_info=True)
            raise

        strong = np.stack([sample.strong_sq for sample in samples])
        phi = np.stack([sample.phi for sample in samples])
        phi_ref = np.array([sample.phi_ref for sample in samples])
        strong_mean, strong_se = _mean_and_se(strong)
        weak_mean, weak_se = _mean_and_se(phi_ref[:, None] - phi)
        phi_mean, phi_se = _mean_and_se(phi)

        constants = bound_constants(spec.norms, spec.horizon)
        bias = spec.reference_bias(n_ref)
        rows = []
        for i, n in enumerate(levels):
            tail = tail_ratio_bound(spec.diffusion, spec.tail_space, n)
            bound = None if tail is None else constants.c * tail + (bias or 0.0)
            rows.append(
                LevelEstimate(
                    n=n,
                    paths=paths,
                    strong_sq=float(strong_mean[i]),
                    strong_se=float(strong_se[i]),
                    weak=float(weak_mean[i]),
                    weak_se=float(weak_se[i]),
                    phi_mean=float(phi_mean[i]),
                    phi_se=float(phi_se[i]),
                    tail_ratio=tail,
                    bound=bound,
                )
            )

        below_reference = [row for row in rows if row.n < n_ref]
        fit_levels = [row.n for row in below_reference]
        strong_fit = _try_fit(fit_levels, [row.strong_sq for row in below_reference], "strong")
        weak_fit = _try_fit(fit_levels, [abs(row.weak) for row in below_reference], "weak")
        logger.info(f"Finished '{spec.name}': {len(rows)} levels over {paths} paths")
        return ErrorReport(
            equation=spec.name,
            seed=plan.seed,
            n_ref=n_ref,
            paths=paths,
            steps=self.config.steps,
            functional=self.functional.name,
            functional_norm=self.functional.c2_norm,
            rows=tuple(rows),
            constants=constants,
            reference_bias=bias,
            strong_fit=strong_fit,
            weak_fit=weak_fit,
            parameters=dict(spec.parameters),
        )

    def __repr__(self):
        return f"ErrorEstimator(equation={self.spec.name}, steps={self.config.steps}, workers={self.workers})"


def estimate_errors(
    spec: EquationSpec,
    levels: Sequence[int],
    paths: int,
    functional,
    plan: NoisePlan,
    config: Optional[StepperConfig] = None,
    workers: int = 1,
) -> ErrorReport:
    config = config or StepperConfig(steps=plan.steps)
    return ErrorEstimator(spec, config, functional, workers).estimate_errors(levels, paths, plan)
