"""Configuration management for bibkit."""

from .loader import ConfigLoader
from .manager import ConfigManager

__all__ = ["ConfigLoader", "ConfigManager"]
