"""Configuration manager for bibkit."""

from pathlib import Path
from typing import Optional

from bibkit.core.models import (
    FractalSettings,
    IBConfig,
    NewtonSettings,
    PartitionSettings,
    PerceptionSettings,
    RunConfig,
    Settings,
    WalkerSettings,
)
from .loader import ConfigLoader


class ConfigManager:
    """Caches the layered settings and hands out individual sections."""

    def __init__(self, config_dir: Optional[Path] = None):
        """Initialize the configuration manager.

        Args:
            config_dir: Directory containing configuration files
        """
        self.loader = ConfigLoader(config_dir)
        self._settings: Optional[Settings] = None

    def reload_config(self) -> None:
        """Drop the cached settings; the next access re-reads files and environment."""
        self._settings = None

    def get_settings(self) -> Settings:
        if self._settings is None:
            self._settings = self.loader.load_settings()
        return self._settings

    def get_newton(self) -> NewtonSettings:
        return self.get_settings().newton

    def get_fractal(self) -> FractalSettings:
        return self.get_settings().fractal

    def get_partition(self) -> PartitionSettings:
        return self.get_settings().partition

    def get_inference(self) -> IBConfig:
        return self.get_settings().inference

    def get_perception(self) -> PerceptionSettings:
        return self.get_settings().perception

    def get_walker(self) -> WalkerSettings:
        return self.get_settings().walker

    def load_run(self, path: Path) -> RunConfig:
        """Parse a run file with the ``inference`` section as its IB defaults."""
        return self.loader.load_run_config(path, base=self.get_inference())
