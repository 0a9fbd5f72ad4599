"""MRCOEF coefficient files."""

import logging
from pathlib import Path
from typing import Dict, Tuple

from ..errors import FormatError, PreconditionError
from ..models import HarmonicCoefficients, Manifold
from .base import (
    ParsingUtilities,
    format_float,
    header_line,
    numeric_rows,
    peek_magic,
    read_file,
)

logger = logging.getLogger(__name__)


class CoefficientFormat:
    """Spectral coefficients, one entry per line.

    Lines are ``k i value`` on S2 and ``k i j value`` on SO(3). On S2xS2,
    entries of an equal-degree pair (k, k) are written ``k i j value`` and
    all others ``k1 k2 i j value``. Orders are 1-based.
    """

    magic = "MRCOEF"

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> HarmonicCoefficients:
        """Read a coefficient file.

        Raises:
            FormatError: On malformed lines, duplicate indices or invalid degrees
        """
        fields, body = read_file(file_path, self.magic)
        manifold = self._manifold(fields)
        omega = ParsingUtilities.parse_float(ParsingUtilities.require(fields, "omega"), 1)
        entries: Dict[Tuple[int, ...], float] = {}
        for number, values in numeric_rows(body):
            index = self._index(manifold, values[:-1], number)
            if index in entries:
                raise FormatError(f"Duplicate coefficient index {index}", number)
            entries[index] = values[-1]
        try:
            coefficients = HarmonicCoefficients.from_entries(manifold, omega, entries)
        except PreconditionError as e:
            raise FormatError(f"Invalid coefficients in {file_path}: {e}") from e
        logger.debug(f"Read {len(entries)} {manifold.value} coefficients from {file_path}")
        return coefficients

    @staticmethod
    def _manifold(fields: Dict[str, str]) -> Manifold:
        try:
            return Manifold.parse(ParsingUtilities.require(fields, "manifold"))
        except PreconditionError as e:
            raise FormatError(str(e), 1) from e

    @staticmethod
    def _index(manifold: Manifold, raw: list, number: int) -> Tuple[int, ...]:
        if any(v != int(v) for v in raw):
            raise FormatError("Indices must be integers", number)
        index = tuple(int(v) for v in raw)
        if manifold == Manifold.S2 and len(index) == 2:
            return index
        if manifold == Manifold.SO3 and len(index) == 3:
            return index
        if manifold == Manifold.S2XS2 and len(index) == 3:
            k, i, j = index
            return (k, k, i, j)
        if manifold == Manifold.S2XS2 and len(index) == 4:
            return index
        raise FormatError(f"Wrong number of indices for {manifold.value}: {len(index)}", number)

    def dump(self, coefficients: HarmonicCoefficients, file_path: Path) -> None:
        """Write coefficients, zero entries included, in block order."""
        lines = [header_line(self.magic, manifold=coefficients.manifold.value, omega=float(coefficients.omega))]
        for index, value in coefficients.entries():
            if coefficients.manifold == Manifold.S2XS2 and index[0] == index[1]:
                index = (index[0],) + index[2:]
            lines.append(" ".join(str(i) for i in index) + " " + format_float(value))
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
