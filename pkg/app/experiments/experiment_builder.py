"""
Turn a validated ExperimentConfig into an EquationSpec, a noise plan and a stepper.
"""

import logging
import math
from dataclasses import replace
from typing import Optional

import numpy as np

from app.coefficients.diffusion import GaussianProfile, Profile, SineModeProfile
from app.coefficients.drift import NONLINEARITIES, AffineDrift, NemytskiiDrift, ZeroDrift
from app.coefficients.lambdas import ExplicitLambdas, PowerLawLambdas
from app.equations.EquationSpec_class import EquationSpec
from app.equations.diagonal import make_diagonal
from app.equations.fourier_equations import make_airy, make_schrodinger
from app.equations.hjmm import exponential_rows, make_hjmm, maturity_grid
from app.equations.wave import make_wave, wave_grid
from app.experiments.experiment_config import ExperimentConfig, find_key_line
from app.integrator.ExponentialEuler_class import StepperConfig
from app.noise.increments import NoisePlan
from app.spectral.bases import Basis, CollocationGrid
from app.spectral.fields import SpectralField
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_SIGMA_EXPONENT = {"wave": 0.5, "schrodinger": 2.0, "airy": 2.0}


class EquationBuilder:
    """Builds one configured equation; `text` (the raw TOML) locates errors."""

    def __init__(self, config: ExperimentConfig, text: Optional[str] = None):
        self.config = config
        self.text = text

    def _error(self, message: str, section: str, key: Optional[str] = None) -> ConfigurationError:
        line = find_key_line(self.text, section, key) if self.text else None
        return ConfigurationError(message, line=line)

    def _require_diffusion(self, kind: str):
        actual = self.config.diffusion.kind
        if actual != kind:
            raise self._error(
                f"{self.config.experiment.equation} needs diffusion kind '{kind}', got '{actual}'",
                "diffusion",
                "kind",
            )

    def _profile(self, which: str) -> Profile:
        diffusion = self.config.diffusion
        kind = getattr(diffusion, f"{which}_profile")
        value = getattr(diffusion, which)
        if kind == "constant":
            return float(value)
        if kind == "sine_mode":
            return SineModeProfile(value, diffusion.profile_mode)
        return GaussianProfile(value, diffusion.profile_width)

    def _sigma_exponent(self) -> float:
        value = self.config.equation.sigma_exponent
        return DEFAULT_SIGMA_EXPONENT[self.config.experiment.equation] if value is None else value

    def build(self) -> EquationSpec:
        builders = {
            "wave": self._wave,
            "hjmm": self._hjmm,
            "schrodinger": self._torus,
            "airy": self._torus,
            "diagonal": self._diagonal,
        }
        spec = builders[self.config.experiment.equation]()
        overrides = self.config.norms.overrides()
        if overrides:
            logger.info(f"Overriding coefficient norms: {sorted(overrides)}")
            spec = replace(spec, norms=spec.norms.with_overrides(overrides))
        return spec

    def _wave(self) -> EquationSpec:
        equation, drift_config = self.config.equation, self.config.drift
        self._require_diffusion("affine")
        n_ref = self.config.experiment.n_ref
        modes = equation.modes or n_ref
        if modes < n_ref:
            raise self._error(f"wave needs modes >= n_ref = {n_ref}, got {modes}", "equation", "modes")
        basis = Basis.dirichlet_sine(modes)
        grid = wave_grid(modes, equation.grid) if equation.grid else None
        if drift_config.kind == "zero":
            drift = ZeroDrift()
        elif drift_config.kind == "affine":
            drift = AffineDrift(drift_config.f0 * basis.constant_one(), drift_config.f1)
        elif drift_config.kind == "nemytskii":
            grid = grid or wave_grid(modes)
            drift = NemytskiiDrift(self._nonlinearity(), grid)
        else:
            raise self._error("wave does not take a no-arbitrage drift", "drift", "kind")
        position = np.zeros(modes)
        if equation.initial_mode > modes:
            raise self._error(f"initial_mode must be at most {modes}", "equation", "initial_mode")
        position[equation.initial_mode - 1] = equation.initial_position
        velocity = np.zeros(modes)
        velocity[equation.initial_mode - 1] = equation.initial_velocity
        try:
            return make_wave(
                theta=equation.theta,
                epsilon=equation.epsilon,
                eta=equation.eta,
                drift=drift,
                b0=self._profile("b0"),
                b1=self._profile("b1"),
                sigma_exponent=self._sigma_exponent(),
                initial_position=position,
                initial_velocity=velocity,
                horizon=equation.horizon,
                modes=modes,
                grid=grid,
                diffusion_lipschitz=self.config.diffusion.lipschitz,
            )
        except ConfigurationError as e:
            raise self._error(str(e), "equation") from e

    def _nonlinearity(self):
        drift = self.config.drift
        if drift.nonlinearity == "sine":
            return NONLINEARITIES["sine"](drift.amplitude, drift.frequency)
        return NONLINEARITIES[drift.nonlinearity](drift.amplitude)

    def _hjmm(self) -> EquationSpec:
        equation, diffusion = self.config.equation, self.config.diffusion
        self._require_diffusion("exponential_rows")
        if self.config.drift.kind not in ("zero", "no_arbitrage"):
            raise self._error("hjmm always uses the no-arbitrage drift", "drift", "kind")
        if not diffusion.amplitudes or len(diffusion.amplitudes) != len(diffusion.decays):
            raise self._error(
                "hjmm needs matching nonempty amplitudes and decays", "diffusion", "amplitudes"
            )
        maturities = maturity_grid(equation.tau_max, equation.intervals)
        rows = exponential_rows(diffusion.amplitudes, diffusion.decays, maturities)
        try:
            return make_hjmm(
                rows=rows,
                alpha=equation.alpha,
                tau_max=equation.tau_max,
                intervals=equation.intervals,
                initial=np.full(maturities.size, equation.initial_rate),
                horizon=equation.horizon,
                drift_mode=equation.drift_mode,
            )
        except ConfigurationError as e:
            raise self._error(str(e), "equation") from e

    def _torus(self) -> EquationSpec:
        name = self.config.experiment.equation
        equation, drift_config = self.config.equation, self.config.drift
        self._require_diffusion("affine")
        if self.config.diffusion.b1_profile != "constant":
            raise self._error(f"{name} takes a constant b1", "diffusion", "b1_profile")
        if drift_config.kind not in ("zero", "affine"):
            raise self._error(f"{name} takes a zero or affine drift", "drift", "kind")
        per_mode = 2 if name == "schrodinger" else 1
        n_ref = self.config.experiment.n_ref
        cutoff = equation.cutoff or max(1, math.ceil((n_ref / per_mode - 1) / 2))
        columns = (2 * cutoff + 1) * per_mode
        if columns < n_ref:
            raise self._error(
                f"{name} with cutoff {cutoff} has {columns} noise columns, fewer than n_ref = {n_ref}",
                "equation",
                "cutoff",
            )
        basis = Basis.fourier_torus(cutoff, equation.half_length)
        grid = CollocationGrid.for_basis(basis, equation.grid) if equation.grid else None
        initial = SpectralField.from_function(
            basis, GaussianProfile(equation.initial_amplitude, equation.initial_width), grid
        ).coefficients
        make = make_schrodinger if name == "schrodinger" else make_airy
        try:
            return make(
                cutoff=cutoff,
                initial=initial.astype(complex) if name == "schrodinger" else initial,
                horizon=equation.horizon,
                half_length=equation.half_length,
                f0=drift_config.f0,
                f1=drift_config.f1,
                b0=self._profile("b0"),
                b1=self.config.diffusion.b1,
                sigma_exponent=self._sigma_exponent(),
                regularity=equation.regularity,
                grid=grid,
                diffusion_lipschitz=self.config.diffusion.lipschitz,
            )
        except ConfigurationError as e:
            raise self._error(str(e), "equation") from e

    def _diagonal(self) -> EquationSpec:
        equation, drift_config = self.config.equation, self.config.drift
        self._require_diffusion("diagonal")
        if (equation.q is None) == (equation.lambdas is None):
            raise self._error("diagonal needs exactly one of q or lambdas", "equation", "q")
        lambdas = build_lambdas(self.config)
        if drift_config.kind not in ("zero", "affine"):
            raise self._error("diagonal takes a zero or affine drift", "drift", "kind")
        size = equation.modes or self.config.experiment.n_ref
        if size < self.config.experiment.n_ref:
            raise self._error("diagonal needs modes >= n_ref", "equation", "modes")
        return make_diagonal(
            lambdas,
            size,
            horizon=equation.horizon,
            f0=np.full(size, drift_config.f0),
            f1=drift_config.f1,
        )


def build_equation(config: ExperimentConfig, text: Optional[str] = None) -> EquationSpec:
    return EquationBuilder(config, text).build()


def build_lambdas(config: ExperimentConfig):
    """Lambda family of a diagonal config."""
    equation = config.equation
    if equation.lambdas is not None:
        return ExplicitLambdas(equation.lambdas)
    if equation.q is None:
        raise ConfigurationError("diagonal config needs q or lambdas")
    return PowerLawLambdas(equation.q)


def build_plan(config: ExperimentConfig, seed: int) -> NoisePlan:
    return NoisePlan.uniform(
        config.experiment.n_ref, config.equation.horizon, config.experiment.steps, seed=seed
    )


def build_stepper(config: ExperimentConfig) -> StepperConfig:
    return StepperConfig(steps=config.experiment.steps, collocation_grid=config.equation.grid)
