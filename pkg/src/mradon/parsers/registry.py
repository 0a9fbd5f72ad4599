"""Format registry for the MR* text files."""

from pathlib import Path
from typing import List, Optional

from ..protocols import FileFormat
from .base import peek_magic


class FormatRegistry:
    """Registry for managing and selecting file formats.

    The registry keeps a collection of formats and selects the one whose
    magic word opens a given file.
    """

    def __init__(self) -> None:
        """Initialize an empty format registry."""
        self._formats: List[FileFormat] = []

    def register_format(self, file_format: FileFormat) -> None:
        """Register a new format with the registry.

        Args:
            file_format: FileFormat instance to register
        """
        self._formats.append(file_format)

    def get_format(self, file_path: Path) -> Optional[FileFormat]:
        """Get the format that can read the given file.

        Args:
            file_path: Path to the file

        Returns:
            FileFormat instance that can parse the file, or None if no format matches
        """
        magic = peek_magic(file_path)
        for file_format in self._formats:
            if file_format.magic == magic:
                return file_format
        return None

    def get_format_by_magic(self, magic: str) -> Optional[FileFormat]:
        for file_format in self._formats:
            if file_format.magic == magic:
                return file_format
        return None

    def get_all_formats(self) -> List[FileFormat]:
        """Get all registered formats.

        Returns:
            List of all registered FileFormat instances
        """
        return self._formats.copy()
