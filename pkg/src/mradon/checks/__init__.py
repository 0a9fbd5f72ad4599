"""Self-test checks."""

from .acceptance import ALL_CHECKS, all_passed, check_names, run_checks

__all__ = ["ALL_CHECKS", "all_passed", "check_names", "run_checks"]
