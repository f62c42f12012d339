"""Configuration management for the carousel toolkit"""
import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from pydantic import ValidationError

from .models.errors import ConfigError
from .models.schema import ExperimentConfig, StrategyParams

logger = logging.getLogger(__name__)

ENV_PREFIX = "CAROUSEL_"
ENV_SECTION_SEPARATOR = "__"

# ExperimentConfig field -> dotted config key
FIELD_KEYS = {
    "strategies": "experiment.strategies",
    "k_values": "experiment.k_values",
    "provider": "experiment.provider",
    "compare_random": "experiment.compare_random",
    "prediction_depth": "experiment.prediction_depth",
    "n_test_users": "data.n_test_users",
    "holdout": "data.holdout",
    "seed": "run.seed",
    "workers": "run.workers",
    "carousel_size": "strategy.carousel_size",
    "predicted_take": "strategy.predicted_take",
    "combined_predicted_take": "strategy.combined_predicted_take",
    "pool_size": "strategy.candidate_pool_size",
    "recency_window": "strategy.recency_window",
    "novelty_window_days": "strategy.novelty_window_days",
    "novelty_cutoff": "strategy.novelty_cutoff",
    "evaluation_date": "strategy.evaluation_date",
    "exclude_diagonal": "bis.exclude_diagonal",
    "events": "events",
}

WEIGHT_KEYS = {
    "author": "bis.author_weight",
    "genre": "bis.genre_weight",
    "subject": "bis.subject_weight",
    "age_category": "bis.age_category_weight",
    "medium_type": "bis.medium_type_weight",
    "fiction": "bis.fiction_weight",
}


def _deep_merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _deep_merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)
    return base


def _parse_env_value(raw: str, current: Any) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        if isinstance(current, list):
            return [part.strip() for part in raw.split(",") if part.strip()]
        return raw


class Config:
    """Application configuration: defaults < --config file < CAROUSEL_* environment < flags"""

    def __init__(
        self,
        config_path: Optional[Path] = None,
        env: Optional[Mapping[str, str]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ):
        self.config_path = Path(config_path) if config_path else None
        self._config = self._load_config()
        self._apply_env(os.environ if env is None else env)
        for key, value in (overrides or {}).items():
            if value is not None:
                self.set(key, value)

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration"""
        return {
            "bis": {
                "author_weight": 1.0,
                "genre_weight": 2.0,
                "subject_weight": 1.0,
                "age_category_weight": 2.0,
                "medium_type_weight": 1.0,
                "fiction_weight": 1.0,
                "exclude_diagonal": False,
            },
            "data": {
                "min_annual_loans": 10,
                "max_annual_loans": 50,
                "n_test_users": 100,
                "holdout": 5,
            },
            "strategy": {
                "carousel_size": 15,
                "predicted_take": 10,
                "combined_predicted_take": 9,
                "candidate_pool_size": 100,
                "recency_window": 200,
                "novelty_window_days": 365,
                "novelty_cutoff": None,
                "evaluation_date": None,
            },
            "experiment": {
                "strategies": ["original", "diversity", "serendipity", "novelty", "combined"],
                "k_values": [10, 25, 50, 100, 250],
                "provider": "cooccurrence",
                "compare_random": True,
                "prediction_depth": 250,
            },
            "events": [],
            "run": {
                "seed": 42,
                "workers": 1,
            },
        }

    def _load_config(self) -> Dict[str, Any]:
        """Defaults with the optional config file merged over them"""
        config = self._get_default_config()
        if self.config_path is None:
            return config
        if not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {self.config_path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {self.config_path} must hold a JSON object")

        unknown = sorted(set(loaded) - set(config))
        if unknown:
            raise ConfigError(f"unknown config section {name!r}" for name in unknown)
        logger.info("Loaded configuration from %s", self.config_path)
        return _deep_merge(config, loaded)

    def _apply_env(self, env: Mapping[str, str]) -> None:
        errors: List[str] = []
        for name in sorted(env):
            if not name.startswith(ENV_PREFIX):
                continue
            path = name[len(ENV_PREFIX):].lower().split(ENV_SECTION_SEPARATOR)
            key = ".".join(path)
            if not self._known(key):
                errors.append(f"{name}: no config key {key!r}")
                continue
            self.set(key, _parse_env_value(env[name], self.get(key)))
            logger.debug("Config %s overridden from environment", key)
        if errors:
            raise ConfigError(errors)

    def _known(self, key: str) -> bool:
        node: Any = self._get_default_config()
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return False
            node = node[part]
        return True

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        keys = key.split(".")
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key: str, value: Any) -> None:
        *parents, last = key.split(".")
        node = self._config
        for k in parents:
            node = node.setdefault(k, {})
        node[last] = value

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def loan_filter(self):
        low, high = self.get("data.min_annual_loans"), self.get("data.max_annual_loans")
        if low is not None and high is not None and low > high:
            raise ConfigError(f"data.min_annual_loans {low} exceeds data.max_annual_loans {high}")
        return low, high

    def experiment_config(self) -> ExperimentConfig:
        """Validated ExperimentConfig; every invalid value is reported in one ConfigError"""
        fields = {field: self.get(key) for field, key in FIELD_KEYS.items()}
        fields["weights"] = {field: self.get(key) for field, key in WEIGHT_KEYS.items()}
        fields = {k: v for k, v in fields.items() if v is not None}

        errors: List[str] = []
        provider = str(fields.get("provider", ""))
        if provider not in ("cooccurrence", "random") and not provider.startswith("import:"):
            errors.append(f"experiment.provider: unknown provider {provider!r}; valid providers: cooccurrence, random, import:<path>")

        try:
            config = ExperimentConfig(**fields)
        except ValidationError as e:
            errors.extend(self._messages(e))
            raise ConfigError(errors) from e

        try:
            StrategyParams(
                carousel_size=config.carousel_size,
                predicted_take=config.predicted_take,
                combined_predicted_take=config.combined_predicted_take,
                candidate_pool_size=config.pool_size,
                recency_window=config.recency_window,
            )
        except ValidationError as e:
            errors.extend(f"strategy: {err['msg']}" for err in e.errors())
        if errors:
            raise ConfigError(errors)
        return config

    @staticmethod
    def _messages(e: ValidationError) -> List[str]:
        messages = []
        for err in e.errors():
            loc = [str(p) for p in err["loc"]]
            if not loc:
                key = "config"
            elif loc[0] == "weights" and len(loc) > 1 and loc[1] in WEIGHT_KEYS:
                key = WEIGHT_KEYS[loc[1]]
            elif loc[0] == "weights":
                key = "bis"
            elif loc[0] in FIELD_KEYS:
                key = ".".join([FIELD_KEYS[loc[0]]] + loc[1:])
            else:
                key = ".".join(loc)
            messages.append(f"{key}: {err['msg']}")
        return messages

    def save(self, path: Path) -> None:
        """Save configuration to file"""
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self._config, f, indent=2)
            f.write("\n")
