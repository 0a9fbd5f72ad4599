"""MRFRM frame manifests."""

import logging
from pathlib import Path

from ..core.frames import build_filter_bank, frame_from_cubatures
from ..errors import FormatError, PreconditionError
from ..models import FrameSystem
from .base import ParsingUtilities, format_float, header_line, peek_magic, read_file
from .cubature_format import CubatureFormat
from .lattice_format import LatticeFormat

logger = logging.getLogger(__name__)


class FrameManifestFormat:
    """Frame manifest: header then ``level <j> lattice=<file> cubature=<file>`` lines.

    File references are relative to the manifest's directory.
    """

    magic = "MRFRM"

    def __init__(self) -> None:
        self._lattices = LatticeFormat()
        self._cubatures = CubatureFormat()

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> FrameSystem:
        """Read a manifest and the per-level cubature files it names.

        Raises:
            FormatError: If the manifest or a level file is malformed
        """
        fields, body = read_file(file_path, self.magic)
        j_max = ParsingUtilities.parse_int(ParsingUtilities.require(fields, "Jmax"), 1)
        constant = ParsingUtilities.parse_float(ParsingUtilities.require(fields, "c"), 1)
        if fields.get("manifold", "S2") != "S2":
            raise FormatError("Frames are built on S2", 1)
        cubature_files = {}
        for number, line in body:
            if ParsingUtilities.is_empty_line(line):
                continue
            tokens = line.split()
            if len(tokens) < 2 or tokens[0] != "level":
                raise FormatError("Expected 'level <j> lattice=<file> cubature=<file>'", number)
            j = ParsingUtilities.parse_int(tokens[1], number)
            refs = dict(token.split("=", 1) for token in tokens[2:] if "=" in token)
            if "cubature" not in refs:
                raise FormatError(f"Level {j} names no cubature file", number)
            if j in cubature_files:
                raise FormatError(f"Duplicate level {j}", number)
            cubature_files[j] = file_path.parent / refs["cubature"]
        if sorted(cubature_files) != list(range(j_max + 1)):
            raise FormatError(f"Manifest must list levels 0..{j_max}")
        cubatures = [self._cubatures.parse(cubature_files[j]) for j in range(j_max + 1)]
        try:
            return frame_from_cubatures(build_filter_bank(j_max), cubatures, constant)
        except PreconditionError as e:
            raise FormatError(f"Invalid frame: {e}") from e

    def dump(self, fs: FrameSystem, file_path: Path) -> None:
        """Write the manifest and ``level<j>.mrlat`` / ``level<j>.mrcub`` beside it."""
        directory = file_path.parent
        directory.mkdir(parents=True, exist_ok=True)
        lines = [header_line(self.magic, manifold="S2", Jmax=fs.j_max, c=format_float(fs.lattice_constant))]
        for level in fs.levels:
            lattice_name = f"level{level.j}.mrlat"
            cubature_name = f"level{level.j}.mrcub"
            self._lattices.dump(level.cubature.lattice, directory / lattice_name)
            self._cubatures.dump(level.cubature, directory / cubature_name)
            lines.append(f"level {level.j} lattice={lattice_name} cubature={cubature_name}")
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(f"Wrote frame manifest with {len(fs.levels)} levels to {file_path}")
