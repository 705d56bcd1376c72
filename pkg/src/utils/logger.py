"""
Logger utility for the SBC concentration toolkit
"""
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

from src.config import Config

LOG_FILE_NAME = "sbc_concentration.log"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
CONSOLE_FORMAT = "%(levelname)s - %(message)s"


def setup_logger(name: Optional[str] = None, level: Optional[str] = None) -> logging.Logger:
    """
    Attach the console handler, and the rotating file handler when LOG_TO_FILE is set

    Calling it again for a configured logger returns the logger unchanged.

    Args:
        name: Logger name (defaults to "sbc_concentration")
        level: Level name overriding LOG_LEVEL

    Returns:
        logging.Logger: Configured logger
    """
    logger = logging.getLogger(name or "sbc_concentration")
    if logger.handlers:
        return logger

    log_level = getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO)
    logger.setLevel(log_level)

    if Config.LOG_TO_FILE:
        Config.LOG_DIR.mkdir(exist_ok=True, parents=True)
        file_handler = RotatingFileHandler(
            Config.LOG_DIR / LOG_FILE_NAME,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
        )
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        file_handler.setLevel(log_level)
        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    console_handler.setLevel(log_level)
    logger.addHandler(console_handler)

    return logger
