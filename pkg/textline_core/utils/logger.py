import logging
import os
import sys

from dotenv import load_dotenv

from .config_loader import PROJECT_ROOT

_env_loaded = False


def _resolve_level():
    """Log level from TEXTLINE_LOG_LEVEL (environment or project .env), INFO otherwise."""
    global _env_loaded
    if not _env_loaded:
        env_path = PROJECT_ROOT / ".env"
        if env_path.exists():
            load_dotenv(env_path)
        _env_loaded = True
    name = os.getenv("TEXTLINE_LOG_LEVEL", "INFO").strip().upper()
    return getattr(logging, name, logging.INFO)


def get_logger(name):
    """Get a logger instance with default configuration."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(_resolve_level())
    return logger
