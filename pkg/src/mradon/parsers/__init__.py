"""File format implementations."""

from .base import ParsingUtilities, format_float, stream_file_lines
from .coefficient_format import CoefficientFormat
from .cubature_format import CubatureFormat
from .format_service import FormatService
from .frame_format import FrameManifestFormat
from .lattice_format import LatticeFormat
from .registry import FormatRegistry
from .sample_format import SampleFormat
from .spline_format import SplineProblemFormat

__all__ = [
    "ParsingUtilities",
    "format_float",
    "stream_file_lines",
    "CoefficientFormat",
    "CubatureFormat",
    "FormatService",
    "FrameManifestFormat",
    "LatticeFormat",
    "FormatRegistry",
    "SampleFormat",
    "SplineProblemFormat",
]
