"""Services for mradon."""

from .config_manager import ConfigManager
from .experiment_service import ExperimentService

__all__ = ["ConfigManager", "ExperimentService"]
