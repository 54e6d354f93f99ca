"""Configuration management for entrolab."""

from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Optional
import json
import logging

logger = logging.getLogger(__name__)


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _check_range(errors: list[str], name: str, value, low: int, high: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < low or value > high:
        errors.append(f"{name} must be an integer between {low} and {high}, got {value}")


@dataclass(frozen=True)
class Budget:
    """Limits applied to a single computation.

    ``max_steps`` bounds cotrajectory/trajectory length, ``confirm_window`` is
    the number of equal consecutive ratios required before a heuristic
    stationary value is accepted, ``base_prefix`` bounds how many base
    elements of a topology are examined, ``truncation_bound`` caps the number
    of elements of a materialized finite model and ``order_bound`` caps
    exhaustive subgroup enumeration.
    """

    max_steps: int = 64
    confirm_window: int = 8
    base_prefix: int = 6
    truncation_bound: int = 2**20
    order_bound: int = 256

    def validate(self) -> list[str]:
        """Validate budget values. Returns list of error messages."""
        errors: list[str] = []
        _check_range(errors, "max_steps", self.max_steps, 1, 100000)
        _check_range(errors, "confirm_window", self.confirm_window, 1, 100000)
        if not errors and self.confirm_window > self.max_steps:
            errors.append(
                f"confirm_window ({self.confirm_window}) must not exceed max_steps ({self.max_steps})"
            )
        _check_range(errors, "base_prefix", self.base_prefix, 1, 10000)
        _check_range(errors, "truncation_bound", self.truncation_bound, 1, 2**30)
        _check_range(errors, "order_bound", self.order_bound, 1, 65536)
        return errors

    def override(self, **changes) -> "Budget":
        """Return a copy with the given fields replaced, validated."""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(changes) - known)
        if unknown:
            raise ValueError(f"Unknown budget fields: {', '.join(unknown)}")
        budget = replace(self, **changes)
        errors = budget.validate()
        if errors:
            raise ValueError(f"Invalid budget: {'; '.join(errors)}")
        return budget


@dataclass
class EntrolabConfig:
    """Configuration data structure for entrolab."""

    max_steps: int = 64
    confirm_window: int = 8
    base_prefix: int = 6
    truncation_bound: int = 2**20
    order_bound: int = 256
    jobs: int = 1
    log_file_path: str = "~/.entrolab.log"
    log_level: str = "INFO"

    def validate(self) -> list[str]:
        """Validate configuration values. Returns list of error messages."""
        errors = Budget(
            max_steps=self.max_steps,
            confirm_window=self.confirm_window,
            base_prefix=self.base_prefix,
            truncation_bound=self.truncation_bound,
            order_bound=self.order_bound,
        ).validate()

        _check_range(errors, "jobs", self.jobs, 1, 256)

        if not isinstance(self.log_file_path, str) or not self.log_file_path:
            errors.append("log_file_path must be a non-empty string")

        if self.log_level not in LOG_LEVELS:
            errors.append(f"log_level must be one of {', '.join(LOG_LEVELS)}, got {self.log_level}")

        return errors

    def budget(self) -> Budget:
        """Budget view of this configuration."""
        return Budget(
            max_steps=self.max_steps,
            confirm_window=self.confirm_window,
            base_prefix=self.base_prefix,
            truncation_bound=self.truncation_bound,
            order_bound=self.order_bound,
        )


class ConfigManager:
    """Reads and writes ``EntrolabConfig`` as JSON, by default in the home directory.

    A missing file is created with the defaults. A file that does not parse,
    or whose values fail validation, is replaced by the defaults and the
    reason is logged. Keys this version does not know are dropped with a
    warning.
    """

    DEFAULT_CONFIG_PATH = Path("~/.entrolab_config.json")

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = Path(config_path or self.DEFAULT_CONFIG_PATH).expanduser()
        self._config: Optional[EntrolabConfig] = None

    @property
    def config(self) -> EntrolabConfig:
        return self._config if self._config is not None else self.load()

    def _read(self) -> EntrolabConfig:
        data = json.loads(self.config_path.read_text())
        if not isinstance(data, dict):
            raise ValueError("expected a JSON object")
        known = _field_names(EntrolabConfig)
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning("ignoring unknown keys in %s: %s", self.config_path, ", ".join(unknown))
        config = EntrolabConfig(**{k: v for k, v in data.items() if k in known})
        errors = config.validate()
        if errors:
            raise ValueError("; ".join(errors))
        return config

    def load(self) -> EntrolabConfig:
        if not self.config_path.exists():
            logger.info("writing default configuration to %s", self.config_path)
            self.save(EntrolabConfig())
            return self._config
        try:
            self._config = self._read()
        except ValueError as exc:
            logger.warning("replacing unusable configuration %s with defaults: %s", self.config_path, exc)
            self.save(EntrolabConfig())
        return self._config

    def save(self, config: EntrolabConfig) -> None:
        """Validate and write ``config``; invalid values raise ValueError and leave the file alone."""
        errors = config.validate()
        if errors:
            raise ValueError(f"Invalid configuration: {'; '.join(errors)}")
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        self.config_path.write_text(json.dumps(asdict(config), indent=2, sort_keys=True) + "\n")
        self._config = config

    def update(self, **changes) -> EntrolabConfig:
        unknown = sorted(set(changes) - _field_names(EntrolabConfig))
        if unknown:
            raise ValueError(f"Unknown configuration fields: {', '.join(unknown)}")
        config = replace(self.config, **changes)
        self.save(config)
        return config


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}
