"""
Logging Utility Functions
"""
import logging
import os
import sys
from typing import Optional

_CONSOLE_FORMAT = '%(levelname)s: %(message)s'
_FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(log_level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """
    Set up logging configuration

    Handlers installed by an earlier call are removed first, so commands and
    tests can reconfigure logging within one process.

    Args:
        log_level (int): Logging level (default: INFO)
        log_file (str, optional): Path to log file
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    for handler in list(root_logger.handlers):
        if getattr(handler, '_gridrisk', False):
            root_logger.removeHandler(handler)
            handler.close()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter(_CONSOLE_FORMAT))
    console_handler._gridrisk = True
    root_logger.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        file_handler.setFormatter(logging.Formatter(_FILE_FORMAT))
        file_handler._gridrisk = True
        root_logger.addHandler(file_handler)

    logging.debug(f"Log level: {logging.getLevelName(log_level)}")
    if log_file:
        logging.debug(f"Log file: {log_file}")
