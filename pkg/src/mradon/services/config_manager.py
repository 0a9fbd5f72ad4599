"""Configuration management for mradon experiments."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from ..errors import FormatError
from ..models import ExperimentConfig

logger = logging.getLogger(__name__)


class ConfigManager:
    """Loads and saves experiment configuration.

    Values are resolved in order of increasing priority: class defaults, a
    key=value config file, the ``MR_THREADS`` environment variable and finally
    explicit overrides (command-line flags).
    """

    DEFAULT_SEED = 0
    DEFAULT_OUTPUT_DIR = Path(".")
    DEFAULT_THREADS = 1
    DEFAULT_MAX_DEGREE = 512
    DEFAULT_WIGNER_MAX_DEGREE = 128
    DEFAULT_GRID_FACTOR = 4.0
    DEFAULT_DENSITY_CONSTANT = 3.0
    DEFAULT_TOLERANCES = {
        "moment": 1e-10,
        "parity": 1e-12,
        "residual": 1e-10,
        "gram_tail": 1e-12,
    }
    THREADS_ENV = "MR_THREADS"

    _CONVERTERS = {
        "seed": int,
        "output_directory": Path,
        "threads": int,
        "max_degree": int,
        "wigner_max_degree": int,
        "grid_factor": float,
        "density_constant": float,
    }

    def __init__(self, config_path: Optional[Path] = None):
        """Initialize the ConfigManager.

        Args:
            config_path: Optional key=value config file; None means defaults only
        """
        self.config_path = config_path

    def _defaults(self) -> Dict[str, Any]:
        return {
            "seed": self.DEFAULT_SEED,
            "output_directory": self.DEFAULT_OUTPUT_DIR,
            "threads": self.DEFAULT_THREADS,
            "max_degree": self.DEFAULT_MAX_DEGREE,
            "wigner_max_degree": self.DEFAULT_WIGNER_MAX_DEGREE,
            "grid_factor": self.DEFAULT_GRID_FACTOR,
            "density_constant": self.DEFAULT_DENSITY_CONSTANT,
        }

    def _read_file(self, values: Dict[str, Any], tolerances: Dict[str, float]) -> None:
        assert self.config_path is not None
        with open(self.config_path, "r", encoding="utf-8") as f:
            for line_number, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise FormatError(f"Expected key=value in {self.config_path}", line_number)
                key, value = (part.strip() for part in line.split("=", 1))
                try:
                    if key.startswith("tolerance."):
                        tolerances[key[len("tolerance."):]] = float(value)
                    elif key in self._CONVERTERS:
                        values[key] = self._CONVERTERS[key](value)
                    else:
                        raise FormatError(f"Unknown config key '{key}'", line_number)
                except ValueError as e:
                    if isinstance(e, FormatError):
                        raise
                    raise FormatError(f"Bad value for '{key}': {value}", line_number) from e

    def load_config(self, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
        """Resolve the effective configuration.

        Args:
            overrides: Explicit values (None entries are ignored)

        Returns:
            ExperimentConfig with every field resolved

        Raises:
            FileNotFoundError: If the configured file does not exist
            FormatError: If the config file is malformed or has unknown keys
        """
        values = self._defaults()
        tolerances = dict(self.DEFAULT_TOLERANCES)
        if self.config_path is not None:
            self._read_file(values, tolerances)

        env_threads = os.environ.get(self.THREADS_ENV)
        if env_threads:
            try:
                values["threads"] = int(env_threads)
            except ValueError:
                logger.warning(f"Ignoring non-integer {self.THREADS_ENV}={env_threads!r}")

        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key == "tolerances":
                tolerances.update(value)
            elif key in self._CONVERTERS:
                values[key] = self._CONVERTERS[key](value)
            else:
                raise KeyError(f"Unknown configuration override '{key}'")

        config = ExperimentConfig(tolerances=tolerances, **values)
        logger.info(
            f"Effective config: seed={config.seed} threads={config.threads} "
            f"max_degree={config.max_degree} wigner_max_degree={config.wigner_max_degree} "
            f"grid_factor={config.grid_factor} density_constant={config.density_constant}"
        )
        return config

    def save_config(self, config: ExperimentConfig) -> None:
        """Write ``config`` as a key=value file at ``config_path``.

        Raises:
            ValueError: If no config path was given
            IOError: If the file cannot be written
        """
        if self.config_path is None:
            raise ValueError("No config path to save to")
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        lines = [
            f"seed = {config.seed}",
            f"output_directory = {config.output_directory}",
            f"threads = {config.threads}",
            f"max_degree = {config.max_degree}",
            f"wigner_max_degree = {config.wigner_max_degree}",
            f"grid_factor = {config.grid_factor!r}",
            f"density_constant = {config.density_constant!r}",
        ]
        lines += [f"tolerance.{name} = {value!r}" for name, value in sorted(config.tolerances.items())]
        with open(self.config_path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
