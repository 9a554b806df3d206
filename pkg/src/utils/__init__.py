"""Configuration, logging and errors"""

from .config import Config
from .logger import set_log_level, setup_logger

__all__ = [
    'Config',
    'set_log_level',
    'setup_logger',
]
