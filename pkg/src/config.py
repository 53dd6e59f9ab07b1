"""Configuration management for the critical-state toolkit."""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError
from .exploration import PolicyKind, PolicySpec, ScheduleSpec

# Load .env file
load_dotenv()

# Where and how fast results are produced; they never change the results.
UNHASHED_FIELDS = {"output_dir", "workers"}


class McmcConfig(BaseModel):
    """Sampler settings for the Bayesian learning-curve comparison."""
    chains: int = Field(default=4, ge=1)
    iterations: int = Field(default=20_000, ge=2)
    burn_in: int = Field(default=10_000, ge=0)
    thin: int = Field(default=5, ge=1)
    adapt_interval: int = Field(default=50, ge=1)
    smooth_window: int = Field(default=10, ge=1)
    prior_scale: float = Field(default=10.0, gt=0.0)  # box width in data scales
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_burn_in(self) -> "McmcConfig":
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        return self


class ExperimentConfig(BaseModel):
    """One comparison of exploration policies on a maze."""
    model_config = ConfigDict(extra="forbid")

    environment: Literal["cliff_maze", "open_maze"] = "cliff_maze"
    maze_file: Optional[str] = None  # text grid; overrides environment
    maze_size: int = Field(default=11, ge=3)
    policies: List[PolicyKind] = Field(
        default_factory=lambda: [PolicyKind.EPSILON_GREEDY, PolicyKind.PROPOSED]
    )

    # Schedule
    epsilon_start: float = Field(default=0.905, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.005, ge=0.0, le=1.0)
    anneal_steps: int = Field(default=100_000, gt=0)
    k: float = Field(default=0.95, ge=0.0, le=1.0)
    q: float = Field(default=0.1, gt=0.0, lt=1.0)
    exploitation_ratio: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    softmax_temperature: float = Field(default=1.0, gt=0.0)

    # Learner
    learning_rate: float = Field(default=0.3, gt=0.0, le=1.0)
    discount: float = Field(default=0.99, ge=0.0, le=1.0)
    episode_step_cap: int = Field(default=10_000, gt=0)

    # Seeds
    base_seed: int = Field(default=0, ge=0)
    seed_count: int = Field(default=100, ge=1)
    seeds: Optional[List[int]] = None

    # Protocol
    total_steps: int = Field(default=100_000, ge=0)
    eval_interval: int = Field(default=1000, gt=0)
    checkpoint_interval: int = Field(default=10_000, gt=0)
    threshold_mode: Literal["all_states", "recent"] = "all_states"
    refresh_interval: int = Field(default=1000, gt=0)
    buffer_size: int = Field(default=1000, gt=0)
    stop_at_optimal: bool = False

    output_dir: str = "runs"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_schedule(self) -> "ExperimentConfig":
        if not self.policies:
            raise ValueError("at least one policy kind is required")
        if len(set(self.policies)) != len(self.policies):
            raise ValueError("policy kinds must be distinct")
        if self.seeds is not None and len(set(self.seeds)) != len(self.seeds):
            raise ValueError("explicit seeds must be distinct")
        # Builds every policy once so schedule errors surface before any run.
        for kind in self.policies:
            self.policy_spec(kind)
        return self

    def schedule(self) -> ScheduleSpec:
        return ScheduleSpec(
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            anneal_steps=self.anneal_steps,
            k=self.k,
            q=self.q,
        )

    def policy_spec(self, kind: PolicyKind) -> PolicySpec:
        return PolicySpec(
            kind=kind,
            schedule=self.schedule(),
            exploitation_ratio=self.exploitation_ratio,
            temperature=self.softmax_temperature,
        )

    def for_policy(self, kind: PolicyKind) -> "ExperimentConfig":
        """The single-arm config whose hash names the arm's run directory."""
        return self.model_copy(update={"policies": [PolicyKind(kind)]})


class Settings(BaseSettings):
    """Environment-based defaults for the command line."""
    model_config = SettingsConfigDict(
        env_prefix="CRITSTATE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "INFO"
    workers: Optional[int] = None
    output_dir: Optional[str] = None


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get environment settings."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def config_hash(config: BaseModel) -> str:
    """Short sha256 of the canonical JSON dump, without location-only fields."""
    data = config.model_dump(mode="json", exclude=UNHASHED_FIELDS & set(type(config).model_fields))
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def parse_value(key: str, raw: str) -> Any:
    # pydantic's lax mode converts the remaining strings.
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if key in ("policies", "seeds"):
        return [item.strip() for item in raw.split(",") if item.strip()]
    return raw


def parse_key_value(text: str) -> Dict[str, Any]:
    """
    Parse ``key=value`` lines; ``#`` starts a comment and list values are
    comma separated. Unknown keys are kept so validation can report them.
    """
    data: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        data[key] = parse_value(key, value)
    return data


def build_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate raw values, converting pydantic errors to ConfigError."""
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    except ValueError as e:
        raise ConfigError(str(e)) from e


def read_config_file(config_path: Union[str, Path]) -> Dict[str, Any]:
    """Raw values from a ``.json`` or ``key=value`` file."""
    path = Path(config_path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
    return parse_key_value(text)


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Load a config file (if any) and apply overrides on top."""
    data: Dict[str, Any] = {}
    if config_path is not None:
        data.update(read_config_file(config_path))
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(data)


def save_config(config: ExperimentConfig, config_path: Union[str, Path]) -> None:
    """Save configuration to JSON file."""
    path = Path(config_path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.model_dump(mode="json"), f, indent=4)
