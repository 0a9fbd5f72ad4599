"""MRCUB cubature files."""

import logging
from pathlib import Path

import numpy as np

from ..errors import FormatError, PreconditionError
from ..models import Cubature, Manifold
from .base import (
    ParsingUtilities,
    format_row,
    header_line,
    numeric_rows,
    peek_magic,
    points_to_rows,
    read_file,
)
from .lattice_format import build_lattice, certificate_line, lattice_fields, parse_certificate

logger = logging.getLogger(__name__)


class CubatureFormat:
    """Cubature nodes and weights: lattice coordinates then the weight on each line."""

    magic = "MRCUB"

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> Cubature:
        """Read a cubature file.

        Raises:
            FormatError: If the file is malformed or a weight is not positive
        """
        fields, body = read_file(file_path, self.magic)
        try:
            manifold = Manifold.parse(ParsingUtilities.require(fields, "manifold"))
        except PreconditionError as e:
            raise FormatError(str(e), 1) from e
        omega = ParsingUtilities.parse_float(ParsingUtilities.require(fields, "omega"), 1)
        residual = ParsingUtilities.parse_float(fields.get("residual", "nan"), 1)
        width = manifold.point_width + 1
        rows = []
        for number, values in numeric_rows(body, width):
            if values[-1] <= 0:
                raise FormatError(f"Non-positive weight {values[-1]}", number)
            rows.append(values)
        table = np.asarray(rows, dtype=float).reshape(len(rows), width)
        lattice = build_lattice(fields, table[:, :-1], parse_certificate(body))
        try:
            cubature = Cubature(lattice=lattice, weights=table[:, -1], omega_exact=omega, residual=residual)
        except PreconditionError as e:
            raise FormatError(f"Invalid cubature: {e}") from e
        logger.debug(f"Read cubature of {lattice.size} nodes exact to {omega} from {file_path}")
        return cubature

    def dump(self, cubature: Cubature, file_path: Path) -> None:
        lattice = cubature.lattice
        header = header_line(
            self.magic,
            omega=float(cubature.omega_exact),
            residual=float(cubature.residual),
            **lattice_fields(lattice),
        )
        rows = np.hstack([points_to_rows(lattice.manifold, lattice.points), cubature.weights[:, None]])
        lines = [header, certificate_line(lattice.certificate)] + [format_row(row) for row in rows]
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
