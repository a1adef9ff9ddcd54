"""Configuration: process settings from the environment and experiment configs from JSON."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from .core.exceptions import ConfigError
from .utils.units import db_to_linear, dbm_to_watts

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
CONFIG_VERSION = 1


class Settings(BaseSettings):
    """Process configuration from environment variables."""

    # Server settings
    host: str = "0.0.0.0"
    port: int = 8000

    # Experiment runs
    output_dir: str = "runs"
    max_concurrent_runs: int = 2
    run_retention_seconds: int = 3600  # finished runs kept for 1 hour
    sweep_interval_seconds: int = 60
    sweep_workers: int = 1  # >1 evaluates sweep points in worker processes

    # Logging
    log_level: str = "INFO"

    model_config = {"env_prefix": "SIM_SECRECY_"}

    @property
    def output_path(self) -> Path:
        """Output directory as a Path."""
        return Path(self.output_dir)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class RewardConfig(_Strict):
    """Growth coefficients and thresholds of the composite reward."""

    gain_diff: float = Field(1.0, ge=0.0)
    gain_pro: float = Field(1.0, ge=0.0)
    gain_sta: float = Field(0.5, ge=0.0)
    stability_band: float = Field(0.5, ge=0.0)  # bit/s/Hz


class ScenarioConfig(_Strict):
    """Physical scenario. dB quantities are stored as given and exposed linearly."""

    area_size: float = Field(100.0, gt=0.0)  # square side (m), centered under the BS
    bs_position: tuple[float, float, float] = (0.0, 0.0, 20.0)
    eve_position: tuple[float, float, float] = (20.0, 20.0, 0.0)
    num_users: int = Field(2, ge=1)
    max_velocity: float = Field(2.0, ge=0.0)  # m/s
    heading_perturbation: float = Field(math.pi / 6, ge=0.0)  # rad
    slot_duration: float = Field(1.0, gt=0.0)  # s
    slots_per_episode: int = Field(40, ge=1)
    path_loss_exponent: float = Field(2.0, ge=0.0)
    eve_path_loss_exponent: Optional[float] = Field(None, ge=0.0)
    reference_path_loss_db: float = -20.0
    rician_factor_db: float = 10.0
    eve_rician_factor_db: Optional[float] = None
    carrier_frequency_hz: float = Field(3.5e9, gt=0.0)
    noise_dbm_per_hz: float = -110.0
    rhi_level: float = Field(0.1, ge=0.0)  # kappa, same for every MU
    max_power_dbm: float = 30.0
    min_secrecy_rate: float = Field(0.5, ge=0.0)  # bit/s/Hz
    layers: int = Field(4, ge=1)
    atoms_per_layer: int = Field(36, ge=1)
    sim_thickness_wavelengths: float = Field(5.0, gt=0.0)
    reward: RewardConfig = Field(default_factory=RewardConfig)

    @field_validator("atoms_per_layer")
    @classmethod
    def _perfect_square(cls, value: int) -> int:
        side = math.isqrt(value)
        if side * side != value:
            raise ValueError(f"atoms_per_layer must be a perfect square, got {value}")
        return value

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def noise_power_w(self) -> float:
        """Noise power in a 1 Hz reference band (rates are per Hz)."""
        return dbm_to_watts(self.noise_dbm_per_hz)

    @property
    def max_power_w(self) -> float:
        return dbm_to_watts(self.max_power_dbm)

    @property
    def reference_gain(self) -> float:
        return db_to_linear(self.reference_path_loss_db)

    @property
    def rician_factor(self) -> float:
        return db_to_linear(self.rician_factor_db)

    @property
    def eve_rician_factor(self) -> float:
        if self.eve_rician_factor_db is None:
            return self.rician_factor
        return db_to_linear(self.eve_rician_factor_db)

    @property
    def eve_exponent(self) -> float:
        if self.eve_path_loss_exponent is None:
            return self.path_loss_exponent
        return self.eve_path_loss_exponent

    @property
    def action_dim(self) -> int:
        return self.layers * self.atoms_per_layer + self.num_users

    @property
    def state_dim(self) -> int:
        return 4 * self.num_users + 1


class TrainerConfig(_Strict):
    """PPO-BOP hyper-parameters."""

    clip_epsilon: float = Field(0.3, gt=0.0, lt=1.0)
    discount: float = Field(0.98, ge=0.0, lt=1.0)
    gae_lambda: float = Field(0.95, ge=0.0, le=1.0)
    target_kl: float = Field(0.02, gt=0.0)
    kl_threshold: float = Field(0.5, gt=0.0)
    alpha_min: float = Field(0.05, ge=0.0, le=1.0)
    alpha_init: float = Field(0.5, ge=0.0, le=1.0)
    pbe_discount: float = Field(0.7, ge=0.0, le=1.0)
    probability_weighting: float = Field(0.7, ge=0.0)
    pbe_density: Literal["joint", "per_dimension"] = "joint"
    batch_size: int = Field(128, ge=1)
    update_epochs: int = Field(10, ge=1)
    value_coef: float = Field(0.5, ge=0.0)  # beta_b
    entropy_coef: float = Field(0.0, ge=0.0)
    learning_rate: float = Field(1e-3, ge=0.0)
    weight_decay: float = Field(0.01, ge=0.0)
    max_grad_norm: float = Field(0.5, gt=0.0)
    hidden_size: int = Field(128, ge=1)
    lstm_layers: int = Field(3, ge=1)
    attention_heads: int = Field(4, ge=1)
    history_length: int = Field(8, ge=1)
    init_log_std: float = math.log(0.5)
    warmup_episodes: int = Field(50, ge=0)
    episodes: int = Field(500, ge=0)
    buffer_capacity: int = Field(1_000_000, ge=1)
    priority_floor: float = Field(1e-3, gt=0.0)
    threshold_window: int = Field(1000, ge=1)
    eval_episodes: int = Field(20, ge=1)
    checkpoint_every: int = Field(100, ge=1)
    convergence_threshold: float = Field(1e-2, gt=0.0)
    convergence_window: int = Field(20, ge=1)
    convergence_patience: int = Field(10, ge=1)
    stop_on_convergence: bool = False
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_alpha(self) -> "TrainerConfig":
        if self.alpha_init < self.alpha_min:
            raise ValueError(f"alpha_init ({self.alpha_init}) below alpha_min ({self.alpha_min})")
        if self.hidden_size % self.attention_heads != 0:
            raise ValueError(
                f"hidden_size ({self.hidden_size}) not divisible by attention_heads "
                f"({self.attention_heads})"
            )
        return self


class AblationFlags(_Strict):
    """Switches that remove one PPO-BOP mechanism each."""

    disable_bilstm: bool = False
    disable_opdu: bool = False
    disable_pf: bool = False
    disable_mhsa: bool = False

    @property
    def label(self) -> str:
        off = [name.removeprefix("disable_") for name, value in self.model_dump().items() if value]
        return "full" if not off else "no_" + "+".join(off)


class ExperimentConfig(_Strict):
    """Complete, versioned experiment description."""

    version: Literal[1] = CONFIG_VERSION
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    ablation: AblationFlags = Field(default_factory=AblationFlags)

    def with_updates(
        self,
        scenario: Optional[dict] = None,
        trainer: Optional[dict] = None,
        ablation: Optional[dict] = None,
    ) -> "ExperimentConfig":
        """Return a validated copy with the given block fields replaced."""
        data = self.model_dump()
        for key, update in (("scenario", scenario), ("trainer", trainer), ("ablation", ablation)):
            if update:
                data[key].update(update)
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(None, str(e)) from e

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def load_experiment_config(path: str | Path | None) -> ExperimentConfig:
    """
    Load an experiment config from a JSON file.

    Args:
        path: JSON file path, or None for all defaults

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: If the file is missing, not JSON, or fails validation
    """
    if path is None:
        return ExperimentConfig()

    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found")
    except PermissionError:
        raise ConfigError(str(path), "permission denied")

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from e

    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(str(path), str(e)) from e

    logger.info(f"Loaded experiment config from {path}")
    return config


def configure_logging(level: str) -> None:
    """Apply the shared log format at the given level."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )


# Global settings instance
settings = Settings()
