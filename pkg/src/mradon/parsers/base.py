"""Shared helpers for the MR* text formats.

Every file starts with a header ``<MAGIC> v1 key=value ...``. Blank lines and
``#`` comments are ignored in the body unless a format reads them itself.
"""

from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import FormatError
from ..models import Manifold
from ..rotations import euler_to_matrix, matrix_to_euler

FORMAT_VERSION = "v1"


def stream_file_lines(file_path: Path, encoding: str = "utf-8", chunk_size: int = 8192) -> Iterator[str]:
    """Stream lines from a file without loading it into memory.

    Args:
        file_path: Path to the file to read
        encoding: Character encoding of the file (default: utf-8)
        chunk_size: Size of read buffer in bytes (default: 8192)

    Yields:
        Individual lines from the file (without newline characters)
    """
    with open(file_path, "r", encoding=encoding, buffering=chunk_size) as f:
        for line in f:
            yield line.rstrip("\n\r")


def format_float(value: float) -> str:
    """Decimal text with 17 significant digits."""
    return "%.17g" % float(value)


def header_line(magic: str, **fields: object) -> str:
    """Build ``<magic> v1 key=value ...`` with fields in the given order."""
    parts = [magic, FORMAT_VERSION]
    for key, value in fields.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = format_float(value)
        else:
            text = str(value)
        parts.append(f"{key}={text}")
    return " ".join(parts)


def peek_magic(file_path: Path) -> Optional[str]:
    """First token of the first line, or None for unreadable or empty files."""
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            tokens = f.readline().split()
    except (OSError, UnicodeDecodeError):
        return None
    return tokens[0] if tokens else None


class ParsingUtilities:
    """Common utilities for parsing MR* files."""

    @staticmethod
    def parse_header(line: str, magic: str) -> Dict[str, str]:
        """Split a header line into its key=value fields.

        Raises:
            FormatError: On a wrong magic word, version or malformed field
        """
        tokens = line.split()
        if len(tokens) < 2 or tokens[0] != magic:
            raise FormatError(f"Expected a '{magic}' header", 1)
        if tokens[1] != FORMAT_VERSION:
            raise FormatError(f"Unsupported {magic} version '{tokens[1]}'", 1)
        fields = {}
        for token in tokens[2:]:
            if "=" not in token:
                raise FormatError(f"Malformed header field '{token}'", 1)
            key, value = token.split("=", 1)
            fields[key] = value
        return fields

    @staticmethod
    def require(fields: Dict[str, str], key: str) -> str:
        if key not in fields:
            raise FormatError(f"Header lacks '{key}='", 1)
        return fields[key]

    @staticmethod
    def parse_bool(value: str, line_number: int = 1) -> bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise FormatError(f"Expected a boolean, got '{value}'", line_number)

    @staticmethod
    def parse_float(value: str, line_number: int) -> float:
        try:
            return float(value)
        except ValueError as e:
            raise FormatError(f"Expected a number, got '{value}'", line_number) from e

    @staticmethod
    def parse_int(value: str, line_number: int) -> int:
        try:
            return int(value)
        except ValueError as e:
            raise FormatError(f"Expected an integer, got '{value}'", line_number) from e

    @staticmethod
    def is_empty_line(line: str) -> bool:
        """Check if a line is empty, whitespace only or a comment."""
        stripped = line.strip()
        return not stripped or stripped.startswith("#")


def read_file(file_path: Path, magic: str) -> Tuple[Dict[str, str], List[Tuple[int, str]]]:
    """Header fields and the numbered raw body lines (comments included) of a file.

    Raises:
        FormatError: If the file is empty or the header is wrong
    """
    lines = stream_file_lines(file_path)
    first = next(lines, None)
    if first is None:
        raise FormatError(f"{file_path} is empty", 1)
    fields = ParsingUtilities.parse_header(first, magic)
    body = [(number, line) for number, line in enumerate(lines, start=2)]
    return fields, body


def numeric_rows(body: Sequence[Tuple[int, str]], width: Optional[int] = None) -> Iterator[Tuple[int, List[float]]]:
    """Numeric body rows, skipping blank and comment lines.

    Raises:
        FormatError: If a row has the wrong number of values or a non-number
    """
    for number, line in body:
        if ParsingUtilities.is_empty_line(line):
            continue
        values = [ParsingUtilities.parse_float(token, number) for token in line.split()]
        if width is not None and len(values) != width:
            raise FormatError(f"Expected {width} values, got {len(values)}", number)
        yield number, values


def points_from_rows(manifold: Manifold, flat: np.ndarray) -> np.ndarray:
    """Array form of points stored flat (SO(3) points are stored as Euler angles)."""
    if manifold == Manifold.SO3:
        return euler_to_matrix(flat[:, 0], flat[:, 1], flat[:, 2])
    return flat


def points_to_rows(manifold: Manifold, points: np.ndarray) -> np.ndarray:
    """Flat storage form of points, one row per point."""
    if manifold == Manifold.SO3:
        return np.stack(matrix_to_euler(points), axis=1)
    return np.asarray(points, dtype=float).reshape(len(points), -1)


def format_row(values: Sequence[float]) -> str:
    return " ".join(format_float(v) for v in values)
