"""
File Utility Functions
"""
import hashlib
import json
import logging
import os
from typing import Any, Dict

import pandas as pd

from src.utils.errors import DataError

logger = logging.getLogger(__name__)


def ensure_dir(directory: str) -> None:
    """
    Ensure a directory exists, create it if it doesn't

    Args:
        directory (str): Directory path
    """
    if directory and not os.path.exists(directory):
        logger.debug(f"Creating directory: {directory}")
        os.makedirs(directory, exist_ok=True)


def require_file(file_path: str) -> str:
    """
    Check that an input file exists

    Args:
        file_path (str): Path to the file

    Returns:
        str: The same path

    Raises:
        DataError: If the file does not exist
    """
    if not os.path.isfile(file_path):
        raise DataError(f"File does not exist: {file_path}", {"path": file_path})
    return file_path


def write_file(file_path: str, content: str, encoding: str = 'utf-8') -> str:
    """
    Write content to a file, creating parent directories

    Args:
        file_path (str): Path to the file
        content (str): Content to write
        encoding (str): File encoding

    Returns:
        str: The path written
    """
    ensure_dir(os.path.dirname(file_path))
    # newline='' keeps output byte-identical across platforms
    with open(file_path, 'w', encoding=encoding, newline='') as file:
        file.write(content)
    logger.debug(f"Successfully wrote to file: {file_path}")
    return file_path


def canonical_json(payload: Any) -> str:
    """
    Render JSON deterministically (stable key order, fixed indentation)

    Args:
        payload: JSON-serializable object

    Returns:
        str: JSON text terminated by a newline
    """
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(file_path: str, payload: Any) -> str:
    """
    Write a JSON document deterministically

    Args:
        file_path (str): Destination path
        payload: JSON-serializable object

    Returns:
        str: The path written
    """
    return write_file(file_path, canonical_json(payload))


def read_json(file_path: str) -> Dict[str, Any]:
    """
    Read a JSON document

    Args:
        file_path (str): Path to the file

    Returns:
        dict: Parsed content
    """
    require_file(file_path)
    with open(file_path, 'r', encoding='utf-8') as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as e:
            raise DataError(f"Invalid JSON in {file_path}: {e}", {"path": file_path}) from e


def write_csv(file_path: str, frame: pd.DataFrame, float_format: str = '%.6f') -> str:
    """
    Write a DataFrame as CSV with a fixed float format

    Args:
        file_path (str): Destination path
        frame (pd.DataFrame): Table to write (index is not written)
        float_format (str): printf-style float format

    Returns:
        str: The path written
    """
    content = frame.to_csv(index=False, float_format=float_format, lineterminator='\n')
    return write_file(file_path, content)


def short_hash(text: str, length: int = 12) -> str:
    """
    SHA-256 digest prefix of a string

    Args:
        text (str): Input text
        length (int): Number of hex characters to keep

    Returns:
        str: Hex digest prefix
    """
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:length]
