"""
TOML experiment configuration with line-numbered diagnostics.

A config has an [experiment] section (what to measure), an [equation] section
(family parameters), [drift] and [diffusion] sections and an optional [norms]
section overriding analytic coefficient norms.
"""

import hashlib
import json
import logging
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, replace
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

INT64_MAX = 2**63 - 1
SEED_LIMIT = 2**64
REFERENCE_BIAS_FACTOR = 4
EQUATIONS = ("wave", "hjmm", "schrodinger", "airy", "diagonal")

_SECTION_PATTERN = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]")
_KEY_PATTERN = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")
_TOML_LINE_PATTERN = re.compile(r"line (\d+)")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, frozen=True)


class ExperimentSection(_Section):
    equation: Literal["wave", "hjmm", "schrodinger", "airy", "diagonal"]
    levels: List[int]
    n_ref: int = Field(ge=1, le=INT64_MAX)
    name: Optional[str] = None
    paths: int = Field(default=256, ge=2, le=INT64_MAX)
    steps: int = Field(default=256, ge=1, le=INT64_MAX)
    seed: Optional[int] = Field(default=None, ge=0, lt=SEED_LIMIT)
    functional: Literal["gaussian_bell", "smooth_linear"] = "gaussian_bell"
    output_dir: str = "results"
    workers: int = Field(default=1, ge=1, le=1024)
    budget: float = Field(default=1e10, gt=0)
    allow_reference_bias: bool = False

    @field_validator("levels")
    @classmethod
    def _levels_increasing(cls, levels: List[int]) -> List[int]:
        for n in levels:
            if not 1 <= n <= INT64_MAX:
                raise ValueError(f"level {n} must lie in [1, 2^63)")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        return levels

    @model_validator(mode="after")
    def _levels_below_reference(self) -> "ExperimentSection":
        if self.levels and self.levels[-1] > self.n_ref:
            raise ValueError(f"levels must lie in [1, n_ref = {self.n_ref}], got {self.levels[-1]}")
        if self.levels and REFERENCE_BIAS_FACTOR * self.levels[-1] > self.n_ref:
            if not self.allow_reference_bias:
                raise ValueError(
                    f"largest level {self.levels[-1]} exceeds n_ref/{REFERENCE_BIAS_FACTOR}; "
                    "raise n_ref or set allow_reference_bias = true"
                )
            logger.warning(
                f"Largest level {self.levels[-1]} is above n_ref/{REFERENCE_BIAS_FACTOR}; "
                "estimates carry reference-level bias"
            )
        return self


class EquationSection(_Section):
    horizon: float = Field(default=1.0, gt=0)
    modes: Optional[int] = Field(default=None, ge=1, le=INT64_MAX)
    grid: Optional[int] = Field(default=None, ge=1, le=INT64_MAX)
    # wave
    theta: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=0.5, gt=0, lt=1)
    eta: float = 0.0
    initial_mode: int = Field(default=1, ge=1, le=INT64_MAX)
    initial_position: float = 0.0
    initial_velocity: float = 0.0
    # hjmm
    alpha: float = Field(default=1.0, gt=0)
    tau_max: float = Field(default=4.0, gt=0)
    intervals: int = Field(default=64, ge=1, le=INT64_MAX)
    initial_rate: float = 0.0
    drift_mode: Literal["truncated", "full"] = "truncated"
    # schrodinger / airy
    cutoff: Optional[int] = Field(default=None, ge=1, le=INT64_MAX)
    half_length: float = Field(default=32.0, gt=0)
    regularity: float = 1.0
    initial_width: float = Field(default=1.0, gt=0)
    initial_amplitude: float = 0.0
    # diagonal
    q: Optional[float] = None
    lambdas: Optional[List[float]] = None
    # wave b1 regularity or torus Sigma exponent
    sigma_exponent: Optional[float] = None


class DriftSection(_Section):
    kind: Literal["zero", "affine", "nemytskii", "no_arbitrage"] = "zero"
    f0: float = 0.0
    f1: float = 0.0
    nonlinearity: Literal["sine", "tanh"] = "sine"
    amplitude: float = 1.0
    frequency: float = 1.0


class DiffusionSection(_Section):
    kind: Literal["affine", "exponential_rows", "diagonal"] = "affine"
    b0: float = 0.0
    b1: float = 0.0
    b0_profile: Literal["constant", "sine_mode", "gaussian"] = "constant"
    b1_profile: Literal["constant", "sine_mode", "gaussian"] = "constant"
    profile_mode: int = Field(default=1, ge=1, le=INT64_MAX)
    profile_width: float = Field(default=1.0, gt=0)
    amplitudes: List[float] = Field(default_factory=list)
    decays: List[float] = Field(default_factory=list)
    lipschitz: Optional[float] = Field(default=None, ge=0)


class NormsSection(_Section):
    semigroup_h: Optional[float] = Field(default=None, ge=0)
    semigroup_v: Optional[float] = Field(default=None, ge=0)
    drift_c1: Optional[float] = Field(default=None, ge=0)
    drift_c2: Optional[float] = Field(default=None, ge=0)
    diffusion_c1: Optional[float] = Field(default=None, ge=0)
    diffusion_c2: Optional[float] = Field(default=None, ge=0)
    drift_lip_v: Optional[float] = Field(default=None, ge=0)
    diffusion_lip_v: Optional[float] = Field(default=None, ge=0)
    initial_h: Optional[float] = Field(default=None, ge=0)
    initial_v: Optional[float] = Field(default=None, ge=0)

    def overrides(self) -> dict:
        return self.model_dump(exclude_none=True)


class ExperimentConfig(_Section):
    experiment: ExperimentSection
    equation: EquationSection = Field(default_factory=EquationSection)
    drift: DriftSection = Field(default_factory=DriftSection)
    diffusion: DiffusionSection = Field(default_factory=DiffusionSection)
    norms: NormsSection = Field(default_factory=NormsSection)

    @property
    def name(self) -> str:
        return self.experiment.name or self.experiment.equation


@dataclass(frozen=True)
class LoadedConfig:
    config: ExperimentConfig
    text: str
    source: str
    recorded_seed: Optional[int] = None

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


def find_key_line(text: str, section: Optional[str], key: Optional[str]) -> Optional[int]:
    """
    1-based line of `key` inside `[section]`, else of the section header.

    Keys before any header belong to section None.
    """
    current = None
    section_line = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_PATTERN.match(line)
        if header:
            current = header.group(1)
            if current == section and section_line is None:
                section_line = number
            continue
        match = _KEY_PATTERN.match(line)
        if match and current == section and match.group(1) == key:
            return number
    return section_line


def _validation_error(error: ValidationError, text: str) -> ConfigurationError:
    first = error.errors()[0]
    location = [str(part) for part in first["loc"]]
    section = location[0] if location else None
    key = location[1] if len(location) > 1 else None
    line = find_key_line(text, section, key) if key else find_key_line(text, section, None)
    field_name = ".".join(location) or "config"
    return ConfigurationError(f"{field_name}: {first['msg']}", line=line)


def parse_config(text: str, source: str = "<string>") -> LoadedConfig:
    """
    Parse and validate TOML config text.

    Raises:
        ConfigurationError: With the offending line when the text is not valid
            TOML or does not validate.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_LINE_PATTERN.search(str(e))
        raise ConfigurationError(f"{source}: {e}", line=int(match.group(1)) if match else None) from e
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise _validation_error(e, text) from e
    return LoadedConfig(config, text, source)


def load_config(path: str) -> LoadedConfig:
    """
    Load a TOML config, or the config embedded in a run summary (.json).

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigurationError: If the config is invalid.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as file:
        text = file.read()
    recorded_seed = None
    if path.endswith(".json"):
        try:
            provenance = json.loads(text)["provenance"]
            text = provenance["config_text"]
            recorded_seed = provenance.get("seed")
        except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as e:
            raise ConfigurationError(f"{path} is not a run summary with an embedded config") from e
        if recorded_seed is not None and not isinstance(recorded_seed, int):
            raise ConfigurationError(f"{path}: recorded seed must be an integer, got {recorded_seed!r}")
        logger.info(f"Using the config embedded in {path} (recorded seed {recorded_seed})")
    loaded = replace(parse_config(text, source=path), recorded_seed=recorded_seed)
    logger.info(f"Loaded config '{loaded.config.name}' from {path}")
    return loaded
