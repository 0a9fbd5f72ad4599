"""Format service for reading and writing experiment files."""

import logging
from pathlib import Path
from typing import Any, Optional, Type, TypeVar

from ..errors import FormatError
from ..models import Cubature, FrameSystem, HarmonicCoefficients, Lattice, SampleSet, SplineProblem
from .coefficient_format import CoefficientFormat
from .cubature_format import CubatureFormat
from .frame_format import FrameManifestFormat
from .lattice_format import LatticeFormat
from .registry import FormatRegistry
from .sample_format import SampleFormat
from .spline_format import SplineProblemFormat

logger = logging.getLogger(__name__)

T = TypeVar("T")

_MAGIC_BY_TYPE = {
    HarmonicCoefficients: "MRCOEF",
    Lattice: "MRLAT",
    Cubature: "MRCUB",
    SplineProblem: "MRSPL",
    FrameSystem: "MRFRM",
    SampleSet: "MRSMP",
}


class FormatService:
    """Service choosing the right format for each file and object.

    Reading dispatches on the header magic word; writing dispatches on the
    object type.
    """

    def __init__(self, registry: Optional[FormatRegistry] = None):
        """Initialize the format service.

        Args:
            registry: FormatRegistry instance. If None, creates a registry with
                all MR* formats
        """
        if registry is None:
            registry = FormatRegistry()
            registry.register_format(CoefficientFormat())
            registry.register_format(LatticeFormat())
            registry.register_format(CubatureFormat())
            registry.register_format(SplineProblemFormat())
            registry.register_format(FrameManifestFormat())
            registry.register_format(SampleFormat())
        self.registry = registry

    def load(self, file_path: Path) -> Any:
        """Parse a file with the format named by its header.

        Raises:
            FileNotFoundError: If the file does not exist
            FormatError: If no format matches or the file is malformed
        """
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")
        file_format = self.registry.get_format(file_path)
        if file_format is None:
            raise FormatError(f"No format recognises the header of {file_path}", 1)
        logger.info(f"Reading {file_path} as {file_format.magic}")
        try:
            return file_format.parse(file_path)
        except FormatError as e:
            located = FormatError(f"{file_path}: {e}")
            located.line_number = e.line_number
            raise located from e

    def load_as(self, file_path: Path, expected: Type[T]) -> T:
        """Like :meth:`load` but insists on the object type.

        Raises:
            FormatError: If the file holds another kind of object
        """
        obj = self.load(file_path)
        if not isinstance(obj, expected):
            raise FormatError(
                f"{file_path} holds {type(obj).__name__}, expected {expected.__name__}"
            )
        return obj

    def save(self, obj: Any, file_path: Path) -> None:
        """Write ``obj`` in the format matching its type.

        Raises:
            TypeError: If no format stores objects of this type
        """
        magic = _MAGIC_BY_TYPE.get(type(obj))
        file_format = self.registry.get_format_by_magic(magic) if magic else None
        if file_format is None:
            raise TypeError(f"No format stores {type(obj).__name__}")
        file_format.dump(obj, file_path)
        logger.info(f"Wrote {magic} file {file_path}")
