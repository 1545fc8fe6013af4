"""Configuration loader for bibkit."""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from bibkit.core.exceptions import ConfigurationError
from bibkit.core.models import IBConfig, RunConfig, Settings
from bibkit.core.storage import read_key_values

logger = logging.getLogger(__name__)

ENV_PREFIX = "BIBKIT_"

# Run-file keys that belong to the IB section rather than the run itself.
_IB_KEYS = {
    "gamma",
    "theta_source",
    "theta",
    "policy",
    "window",
    "epsilon",
    "ib_tolerance",
    "max_hypotheses",
}


class ConfigLoader:
    """Loads settings from ``defaults.json`` and ``BIBKIT_*`` environment variables."""

    def __init__(self, config_dir: Optional[Path] = None):
        """Initialize the configuration loader.

        Args:
            config_dir: Directory containing configuration files.
                       Defaults to ./config relative to current directory.
        """
        self.config_dir = Path(config_dir) if config_dir else Path("config")
        self.defaults_file = self.config_dir / "defaults.json"

        # Load environment variables from .env file
        load_dotenv()

    def load_file_config(self) -> Dict[str, Any]:
        """Read ``defaults.json``; a missing file yields the built-in defaults."""
        if not self.defaults_file.exists():
            logger.debug("no %s, using built-in defaults", self.defaults_file)
            return {}

        try:
            with open(self.defaults_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Error parsing {self.defaults_file}: {e}", config_type="defaults"
            )
        if not isinstance(data, dict):
            raise ConfigurationError(
                f"{self.defaults_file} must hold a JSON object", config_type="defaults"
            )
        return data

    def load_env_overrides(self) -> Dict[str, Dict[str, str]]:
        """Collect ``BIBKIT_<SECTION>_<FIELD>`` variables into nested sections."""
        overrides: Dict[str, Dict[str, str]] = {}
        for key, value in os.environ.items():
            if not key.startswith(ENV_PREFIX):
                continue
            rest = key[len(ENV_PREFIX):].lower()
            section, _, field = rest.partition("_")
            if section not in Settings.model_fields or not field:
                logger.warning("ignoring unknown environment override %s", key)
                continue
            overrides.setdefault(section, {})[field] = value
        return overrides

    def load_settings(self) -> Settings:
        """Merge file values and environment overrides into a validated Settings."""
        data = self.load_file_config()
        for section, values in self.load_env_overrides().items():
            merged = dict(data.get(section) or {})
            for field, raw in values.items():
                merged[field] = _coerce_env_value(raw)
            data[section] = merged

        try:
            return Settings.model_validate(data)
        except PydanticValidationError as e:
            raise ConfigurationError(
                f"Invalid configuration: {e}",
                config_type="settings",
                metadata={"errors": e.errors(include_url=False)},
            )

    def load_run_config(self, path: Path, base: Optional[IBConfig] = None) -> RunConfig:
        """Parse a ``key=value`` run file for ``infer`` and ``walk``.

        Relative ``tables`` paths are resolved against the run file's directory.
        IB keys fall back to ``base`` (usually the ``inference`` settings section).
        """
        path = Path(path)
        values = read_key_values(path)
        ib_values: Dict[str, Any] = (base or IBConfig()).model_dump()
        run_values: Dict[str, Any] = {}
        for key, value in values.items():
            if key in _IB_KEYS:
                ib_values[key] = value
            elif key in RunConfig.model_fields:
                run_values[key] = value
            else:
                raise ConfigurationError(
                    f"{path}: unknown key {key!r}", config_type="run"
                )
        if "tables" in run_values:
            tables = Path(run_values["tables"])
            run_values["tables"] = tables if tables.is_absolute() else path.parent / tables
        if "theta" in values and "theta_source" not in values:
            ib_values["theta_source"] = "fixed"

        try:
            return RunConfig.model_validate({**run_values, "ib": ib_values})
        except PydanticValidationError as e:
            raise ConfigurationError(
                f"Invalid run configuration {path}: {e}",
                config_type="run",
                metadata={"errors": e.errors(include_url=False)},
            )


def _coerce_env_value(raw: str) -> Any:
    """Environment values may be JSON (numbers, lists, objects) or bare strings."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw
