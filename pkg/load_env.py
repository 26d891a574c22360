"""
Utility to load run defaults from a .env file next to the scripts.

Recognised variables:
    LAMBDA_FCS_JOBS=4          default worker count for --jobs
    LAMBDA_FCS_LOG_DIR=logs    directory for run log files
"""
import logging
import os
from pathlib import Path
from typing import Dict, Optional

from errors import ConfigError

logger = logging.getLogger(__name__)


def load_env_file(env_file: str = ".env") -> Dict[str, str]:
    """
    Load KEY=VALUE lines from a .env file in the repo root into os.environ.

    Lines starting with # are comments. Values may be quoted. Variables that
    are already set in the environment are left alone.

    Returns:
        The variables that were actually set.
    """
    repo_root = Path(__file__).resolve().parent
    env_path = repo_root / env_file
    loaded: Dict[str, str] = {}

    if not env_path.exists():
        # .env is optional
        return loaded

    try:
        with open(env_path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue

                key, value = line.split("=", 1)
                key = key.strip()
                value = value.strip()
                if len(value) >= 2 and value[0] == value[-1] and value[0] in ("'", '"'):
                    value = value[1:-1]

                if key and not os.environ.get(key):
                    os.environ[key] = value
                    loaded[key] = value
    except OSError as e:
        logger.warning(f"Could not read {env_path}: {e}")
    return loaded


def env_int(name: str, default: Optional[int] = None) -> Optional[int]:
    """Positive integer from the environment, or default when unset."""
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{name} must be >= 1, got {value}")
    return value


def env_path(name: str, default: Path) -> Path:
    raw = os.environ.get(name, "").strip()
    return Path(raw) if raw else default
