"""MRSMP sample files."""

from pathlib import Path

import numpy as np

from ..core.spaces import check_points
from ..errors import FormatError, PreconditionError
from ..models import Manifold, SampleSet
from .base import (
    ParsingUtilities,
    format_row,
    header_line,
    numeric_rows,
    peek_magic,
    points_from_rows,
    points_to_rows,
    read_file,
)


class SampleFormat:
    """Point samples: coordinates then one value per line."""

    magic = "MRSMP"

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> SampleSet:
        fields, body = read_file(file_path, self.magic)
        try:
            manifold = Manifold.parse(ParsingUtilities.require(fields, "manifold"))
        except PreconditionError as e:
            raise FormatError(str(e), 1) from e
        width = manifold.point_width + 1
        rows = [values for _, values in numeric_rows(body, width)]
        table = np.asarray(rows, dtype=float).reshape(len(rows), width)
        try:
            points = check_points(manifold, points_from_rows(manifold, table[:, :-1]))
        except PreconditionError as e:
            raise FormatError(f"Invalid sample points: {e}") from e
        return SampleSet(manifold=manifold, points=points, values=table[:, -1])

    def dump(self, samples: SampleSet, file_path: Path) -> None:
        rows = np.hstack([points_to_rows(samples.manifold, samples.points), np.asarray(samples.values)[:, None]])
        lines = [header_line(self.magic, manifold=samples.manifold.value, n=samples.size)]
        lines += [format_row(row) for row in rows]
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
