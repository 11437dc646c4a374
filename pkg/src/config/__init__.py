"""Configuration management."""
import logging
import logging.config
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field

CONFIG_DIR = Path(__file__).parent


class SolverSettings(BaseModel):
    """Solver defaults and resource guards."""

    maxStates: int = Field(2_000_000, ge=1, description="Limit on constructed states")
    defaultEngine: Literal["explicit", "antichain"] = Field(
        "explicit", description="DirFix engine used when none is requested"
    )
    parityEngine: Literal["zielonka", "spm"] = Field("zielonka", description="Parity game solver")
    lmaxWarnFactor: int = Field(4, ge=1, description="Warn when lmax > |Q|*W*factor")


class CrosscheckSettings(BaseModel):
    """Bounds of the random instances generated by the cross-check."""

    count: int = Field(200, ge=1)
    maxStates: int = Field(4, ge=1)
    maxActions: int = Field(2, ge=1)
    maxWeight: int = Field(2, ge=0)
    maxLmax: int = Field(3, ge=1)
    seed: int = 0
    lassosPerArena: int = Field(4, ge=0)
    maxLassoLength: int = Field(6, ge=1)


class ArtifactSettings(BaseModel):
    """Where generated files go."""

    reproDir: str = Field("crosscheck-repro", description="Directory for minimized repro files")


class AppConfig(BaseModel):
    """Complete application configuration."""

    version: int = 1
    solver: SolverSettings = Field(default_factory=SolverSettings)
    crosscheck: CrosscheckSettings = Field(default_factory=CrosscheckSettings)
    artifacts: ArtifactSettings = Field(default_factory=ArtifactSettings)


class ConfigLoader:
    """Loader for the application configuration with caching."""

    _cache: Optional[AppConfig] = None
    _cache_path: Optional[str] = None

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> AppConfig:
        """
        Load the application configuration from YAML.

        Args:
            config_path: Optional path to a config file.
                        Defaults to src/config/app_config.yaml

        Returns:
            Validated configuration

        Raises:
            FileNotFoundError: If the config file doesn't exist
            ValueError: If the config file is invalid
        """
        if config_path is None:
            config_path = str(CONFIG_DIR / "app_config.yaml")

        # Return cached config if loading same file
        if cls._cache is not None and cls._cache_path == config_path:
            return cls._cache

        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        try:
            with open(config_file, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
            config = AppConfig.model_validate(data)
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in config file: {e}")
        except Exception as e:
            raise ValueError(f"Failed to load config: {e}")

        cls._cache = config
        cls._cache_path = config_path
        return config

    @classmethod
    def clear_cache(cls):
        """Clear the config cache."""
        cls._cache = None
        cls._cache_path = None


_logging_configured = False


def configure_logging(verbose: bool = False, logging_path: Optional[str] = None) -> None:
    """
    Apply the logging configuration once; later calls only adjust the level.

    Args:
        verbose: Raise the package loggers to DEBUG
        logging_path: Optional path to a dictConfig YAML file
    """
    global _logging_configured
    if not _logging_configured:
        path = Path(logging_path) if logging_path else CONFIG_DIR / "logging.yaml"
        with open(path, "r", encoding="utf-8") as f:
            logging.config.dictConfig(yaml.safe_load(f))
        _logging_configured = True
    logging.getLogger("src").setLevel(logging.DEBUG if verbose else logging.INFO)
