"""MRSPL spline problem files."""

import logging
from pathlib import Path

import numpy as np

from ..errors import FormatError, PreconditionError
from ..models import Functional, FunctionalKind, FunctionalSet, Manifold, SplineProblem
from .base import (
    ParsingUtilities,
    format_row,
    header_line,
    peek_magic,
    read_file,
)

logger = logging.getLogger(__name__)


class SplineProblemFormat:
    """Functionals and target values, one ``<kind> <coordinates> <value>`` per line.

    Kinds are ``point``, ``sympair``, ``circle``, ``hemi`` and ``so3circ``;
    S2xS2 point evaluations carry six coordinates ``x1 y1 z1 x2 y2 z2``.
    """

    magic = "MRSPL"

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> SplineProblem:
        """Read a spline problem.

        Raises:
            FormatError: On unknown kinds, bad coordinates or duplicate functionals
        """
        fields, body = read_file(file_path, self.magic)
        try:
            manifold = Manifold.parse(ParsingUtilities.require(fields, "manifold"))
        except PreconditionError as e:
            raise FormatError(str(e), 1) from e
        t = ParsingUtilities.parse_float(ParsingUtilities.require(fields, "t"), 1)
        functionals = []
        values = []
        for number, line in body:
            if ParsingUtilities.is_empty_line(line):
                continue
            tokens = line.split()
            try:
                kind = FunctionalKind(tokens[0])
            except ValueError as e:
                raise FormatError(f"Unknown functional kind '{tokens[0]}'", number) from e
            numbers = [ParsingUtilities.parse_float(token, number) for token in tokens[1:]]
            if len(numbers) < 4:
                raise FormatError("Functional line needs coordinates and a value", number)
            try:
                functionals.append(Functional(kind, tuple(numbers[:-1])))
            except PreconditionError as e:
                raise FormatError(str(e), number) from e
            values.append(numbers[-1])
        try:
            functional_set = FunctionalSet(manifold, tuple(functionals))
        except PreconditionError as e:
            raise FormatError(f"Invalid functional set: {e}") from e
        logger.debug(f"Read {len(functionals)} functionals from {file_path}")
        return SplineProblem(functionals=functional_set, values=np.asarray(values, dtype=float), t=t)

    def dump(self, problem: SplineProblem, file_path: Path) -> None:
        lines = [header_line(self.magic, manifold=problem.functionals.manifold.value, t=float(problem.t))]
        for functional, value in zip(problem.functionals, problem.values):
            lines.append(f"{functional.kind.value} {format_row(list(functional.position) + [float(value)])}")
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
