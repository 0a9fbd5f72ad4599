"""MRLAT lattice files."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.geometry import lattice_from_points, product_lattice
from ..core.spaces import check_points
from ..errors import FormatError, PreconditionError
from ..models import Lattice, LatticeCertificate, Manifold
from .base import (
    ParsingUtilities,
    format_float,
    format_row,
    header_line,
    numeric_rows,
    peek_magic,
    points_from_rows,
    points_to_rows,
    read_file,
)

logger = logging.getLogger(__name__)

CERTIFICATE_TAG = "# certificate"


def lattice_fields(lattice: Lattice) -> Dict[str, object]:
    """Header fields describing a lattice (without the magic word)."""
    fields: Dict[str, object] = {
        "manifold": lattice.manifold.value,
        "rho": float(lattice.rho),
        "symmetric": bool(lattice.symmetric),
        "n": lattice.size,
    }
    if lattice.factors is not None:
        first, second = lattice.factors
        fields["factors"] = f"{first.size},{second.size}"
        fields["factor_rho"] = f"{format_float(first.rho)},{format_float(second.rho)}"
    return fields


def certificate_line(certificate: LatticeCertificate) -> str:
    return (
        f"{CERTIFICATE_TAG} min_distance={format_float(certificate.min_distance)} "
        f"covering_radius={format_float(certificate.covering_radius)} "
        f"grid_density={format_float(certificate.grid_density)}"
    )


def parse_certificate(body: List[Tuple[int, str]]) -> Optional[LatticeCertificate]:
    """Certificate from the ``# certificate`` comment line, if present."""
    for number, line in body:
        if not line.startswith(CERTIFICATE_TAG):
            continue
        fields = dict(token.split("=", 1) for token in line[len(CERTIFICATE_TAG):].split() if "=" in token)
        try:
            return LatticeCertificate(
                min_distance=float(fields["min_distance"]),
                covering_radius=float(fields["covering_radius"]),
                grid_density=float(fields["grid_density"]),
            )
        except (KeyError, ValueError) as e:
            raise FormatError(f"Malformed certificate line: {e}", number) from e
    return None


def build_lattice(
    fields: Dict[str, str],
    flat: np.ndarray,
    certificate: Optional[LatticeCertificate],
) -> Lattice:
    """Rebuild a lattice from header fields and flat point rows.

    A missing certificate is recomputed. Product lattices are rebuilt from
    their factors so that cubature can use the product structure.
    """
    try:
        manifold = Manifold.parse(ParsingUtilities.require(fields, "manifold"))
        rho = ParsingUtilities.parse_float(ParsingUtilities.require(fields, "rho"), 1)
        symmetric = ParsingUtilities.parse_bool(fields.get("symmetric", "false"))
        points = points_from_rows(manifold, flat)
        if "factors" in fields:
            return _product_from_rows(fields, points, rho)
        if certificate is None:
            logger.info("Lattice file carries no certificate; recomputing")
            return lattice_from_points(manifold, points, rho, symmetric)
        points = check_points(manifold, points)
        return Lattice(manifold, points, rho, symmetric, certificate)
    except PreconditionError as e:
        raise FormatError(f"Invalid lattice: {e}") from e


def _product_from_rows(fields: Dict[str, str], points: np.ndarray, rho: float) -> Lattice:
    try:
        n1, n2 = (int(v) for v in fields["factors"].split(","))
        rho1, rho2 = (float(v) for v in fields.get("factor_rho", f"{rho},{rho}").split(","))
    except ValueError as e:
        raise FormatError(f"Malformed factor fields: {e}", 1) from e
    if n1 * n2 != points.shape[0]:
        raise FormatError(f"Factor sizes {n1}x{n2} do not match {points.shape[0]} points", 1)
    first = lattice_from_points(Manifold.S2, points[::n2, :3], rho1)
    second = lattice_from_points(Manifold.S2, points[:n2, 3:], rho2)
    lattice = product_lattice(first, second, rho)
    if not np.allclose(lattice.points, points, atol=1e-12):
        raise FormatError("Points are not the product of the stored factors", 1)
    return lattice


class LatticeFormat:
    """Lattice points, one point per line, with an optional certificate comment."""

    magic = "MRLAT"

    def can_parse(self, file_path: Path) -> bool:
        return peek_magic(file_path) == self.magic

    def parse(self, file_path: Path) -> Lattice:
        """Read a lattice file.

        Raises:
            FormatError: If the file is malformed
        """
        fields, body = read_file(file_path, self.magic)
        manifold_name = ParsingUtilities.require(fields, "manifold")
        try:
            width = Manifold.parse(manifold_name).point_width
        except PreconditionError as e:
            raise FormatError(str(e), 1) from e
        rows = [values for _, values in numeric_rows(body, width)]
        if "n" in fields and int(fields["n"]) != len(rows):
            raise FormatError(f"Header announces {fields['n']} points, found {len(rows)}")
        flat = np.asarray(rows, dtype=float).reshape(len(rows), width)
        lattice = build_lattice(fields, flat, parse_certificate(body))
        logger.debug(f"Read {lattice.manifold.value} lattice of {lattice.size} points from {file_path}")
        return lattice

    def dump(self, lattice: Lattice, file_path: Path) -> None:
        lines = [header_line(self.magic, **lattice_fields(lattice)), certificate_line(lattice.certificate)]
        lines += [format_row(row) for row in points_to_rows(lattice.manifold, lattice.points)]
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
