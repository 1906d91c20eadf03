"""Logging configuration for gkdvlab package."""
import os
import logging
from typing import Optional, Union

_is_configured = False

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

def _resolve_level(level: Optional[Union[str, int]]) -> int:
    """Turn a level name (or LOG_LEVEL from the environment) into a logging constant."""
    if isinstance(level, int):
        return level

    level_str = (level or os.getenv('LOG_LEVEL', 'INFO')).upper()
    resolved = logging.getLevelName(level_str)
    if not isinstance(resolved, int):
        logging.getLogger(__name__).warning(f"Invalid LOG_LEVEL: {level_str}. Defaulting to INFO.")
        return logging.INFO
    return resolved

def configure_logging(level: Optional[Union[str, int]] = None, force: bool = False) -> None:
    """Configure the root logger.

    Args:
        level: Level name or constant. Falls back to the LOG_LEVEL environment
            variable, then INFO.
        force: Re-configure even if logging was already set up by this module.
    """
    global _is_configured
    if _is_configured and not force:
        return

    log_level = _resolve_level(level)
    logging.basicConfig(
        level=log_level,
        format=LOG_FORMAT,
        datefmt='%H:%M:%S',
        force=True
    )
    logging.getLogger().setLevel(log_level)

    _is_configured = True

def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Get a configured logger.

    Logging is configured from LOG_LEVEL the first time this is called.

    Usage:
        from gkdvlab.utils.logging import get_logger
        logger = get_logger(__name__)
        logger.debug("Picard difference %.3e", diff)
    """
    configure_logging()
    return logging.getLogger(name or 'gkdvlab')
