"""Protocol interfaces for extensibility in mradon."""

from pathlib import Path
from typing import Any, Dict, Protocol

import numpy as np

from .models import Manifold


class MetricSpace(Protocol):
    """Protocol for the geodesic metrics lattices are built and certified in.

    Implementations embed points into a Euclidean space where a KD-tree
    answers neighbour queries; ``copies`` embedded rows stand for every
    point (row ``r`` belongs to point ``r % N``).
    """

    manifold: Manifold
    copies: int

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Geodesic distance with broadcasting over leading axes.

        Args:
            a: Points in the manifold's array representation
            b: Points in the manifold's array representation

        Returns:
            Array of distances
        """
        ...

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        """One embedded row per point, shape ``(N, D)``."""
        ...

    def embed(self, points: np.ndarray) -> np.ndarray:
        """All ``copies`` embedded rows, shape ``(copies * N, D)``."""
        ...

    def chord_radius(self, geodesic: float) -> float:
        """Upper bound on the embedded distance of points within ``geodesic``."""
        ...


class FileFormat(Protocol):
    """Protocol for the text file formats read and written by the CLI.

    Implementations recognise their header line and convert between files
    and in-memory objects.
    """

    magic: str

    def can_parse(self, file_path: Path) -> bool:
        """Check if this format handles the given file.

        Args:
            file_path: Path to the file to check

        Returns:
            True if the header line carries this format's magic word
        """
        ...

    def parse(self, file_path: Path) -> Any:
        """Parse a file into its in-memory object.

        Raises:
            FormatError: If the file is malformed
        """
        ...

    def dump(self, obj: Any, file_path: Path) -> None:
        """Write ``obj`` to ``file_path`` with 17 significant digits."""
        ...


class AcceptanceCheck(Protocol):
    """Protocol for self-test checks run by ``mradon selftest``."""

    name: str

    def run(self, seed: int) -> Dict[str, Any]:
        """Run the check.

        Args:
            seed: Random seed

        Returns:
            Dictionary with at least ``passed`` (bool) and ``detail`` (str)
        """
        ...
