"""Core data models for mradon."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import PreconditionError
from .rotations import euler_to_matrix, matrix_to_euler

# Eigenvalue comparisons use this slack so boundary degrees are deterministic.
BANDWIDTH_SLACK = 1e-9

DegreeKey = Union[int, Tuple[int, int]]


class Manifold(str, Enum):
    """The three manifolds the library works on."""

    S2 = "S2"
    S2XS2 = "S2xS2"
    SO3 = "SO3"

    @property
    def dimension(self) -> int:
        """Topological dimension n."""
        return {"S2": 2, "S2xS2": 4, "SO3": 3}[self.value]

    @property
    def sobolev_scale(self) -> float:
        """Operator scale a in (I - a*L): 1, 2 or 4."""
        return {"S2": 1.0, "S2xS2": 2.0, "SO3": 4.0}[self.value]

    @property
    def point_width(self) -> int:
        """Number of stored reals per point in flat (file) form."""
        return {"S2": 3, "S2xS2": 6, "SO3": 3}[self.value]

    @classmethod
    def parse(cls, value: str) -> "Manifold":
        """Parse a manifold tag, case-insensitively."""
        for member in cls:
            if member.value.lower() == value.strip().lower():
                return member
        raise PreconditionError(f"Unknown manifold '{value}' (expected S2, S2xS2 or SO3)")


def degree_eigenvalue(k: int) -> float:
    """Laplace-Beltrami / Casimir eigenvalue k(k+1) of degree k."""
    return float(k * (k + 1))


def max_degree_for(omega: float) -> int:
    """Largest degree k with k(k+1) <= omega (-1 if omega < 0)."""
    if omega < -BANDWIDTH_SLACK:
        return -1
    k = int(np.floor(np.sqrt(max(omega, 0.0) + 0.25) - 0.5))
    while (k + 1) * (k + 2) <= omega + BANDWIDTH_SLACK:
        k += 1
    while k >= 0 and k * (k + 1) > omega + BANDWIDTH_SLACK:
        k -= 1
    return k


@dataclass(frozen=True)
class HarmonicIndex:
    """Index of a basis function.

    Attributes:
        k: Degree
        i: Order index, 1 <= i <= 2k+1
        j: Second order index for Wigner polynomials (SO(3)), or None on S2
    """

    k: int
    i: int
    j: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise PreconditionError(f"Degree must be non-negative, got k={self.k}")
        width = 2 * self.k + 1
        if not 1 <= self.i <= width:
            raise PreconditionError(f"Order index i={self.i} out of range 1..{width} for k={self.k}")
        if self.j is not None and not 1 <= self.j <= width:
            raise PreconditionError(f"Order index j={self.j} out of range 1..{width} for k={self.k}")

    @property
    def eigenvalue(self) -> float:
        """Eigenvalue k(k+1)."""
        return degree_eigenvalue(self.k)

    @property
    def order(self) -> int:
        """Signed order m = i - k - 1 of the real harmonic."""
        return self.i - self.k - 1


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector on S2, normalized on construction."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if norm == 0.0:
            raise PreconditionError("Cannot normalize the zero vector onto the sphere")
        object.__setattr__(self, "x", self.x / norm)
        object.__setattr__(self, "y", self.y / norm)
        object.__setattr__(self, "z", self.z / norm)

    def antipode(self) -> "SpherePoint":
        return SpherePoint(-self.x, -self.y, -self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, values: np.ndarray) -> "SpherePoint":
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class RotationPoint:
    """Rotation given by Z-X-Z Euler angles, ``g = Z(gamma) X(beta) Z(alpha)``."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= np.pi:
            raise PreconditionError(f"beta={self.beta} outside [0, pi]")

    def matrix(self) -> np.ndarray:
        return euler_to_matrix(self.alpha, self.beta, self.gamma)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RotationPoint":
        matrix = np.asarray(matrix, dtype=float)
        if not np.allclose(matrix @ matrix.T, np.eye(3), atol=1e-10):
            raise PreconditionError("Matrix is not orthogonal")
        if abs(np.linalg.det(matrix) - 1.0) > 1e-10:
            raise PreconditionError("Matrix does not have determinant 1")
        alpha, beta, gamma = matrix_to_euler(matrix)
        return cls(float(alpha), float(beta), float(gamma))


@dataclass(frozen=True, eq=False)
class HarmonicCoefficients:
    """Spectral representation of a bandlimited function.

    Coefficients are stored per degree block. On S2 a block for degree k is a
    vector of length 2k+1; on SO(3) a (2k+1)x(2k+1) matrix of coefficients
    against the Wigner polynomials T_k^{ij}; on S2xS2 the block for the
    degree pair (k1, k2) is a (2k1+1)x(2k2+1) matrix of coefficients against
    Y_{k1}^i(x) Y_{k2}^j(y).

    Attributes:
        manifold: Manifold tag
        omega: Bandwidth; every stored block has eigenvalue <= omega
        blocks: Mapping from degree key to coefficient block
    """

    manifold: Manifold
    omega: float
    blocks: Mapping[DegreeKey, np.ndarray]

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise PreconditionError(f"Bandwidth must be non-negative, got {self.omega}")
        frozen: Dict[DegreeKey, np.ndarray] = {}
        for key, block in self.blocks.items():
            key = self._normalize_key(key)
            block = np.array(block, dtype=float)
            if block.shape != self.block_shape(key):
                raise PreconditionError(
                    f"Block {key} has shape {block.shape}, expected {self.block_shape(key)}"
                )
            if self.key_eigenvalue(key) > self.omega + BANDWIDTH_SLACK:
                raise PreconditionError(
                    f"Block {key} has eigenvalue {self.key_eigenvalue(key)} above bandwidth "
                    f"{self.omega}"
                )
            block.setflags(write=False)
            frozen[key] = block
        object.__setattr__(self, "blocks", dict(sorted(frozen.items())))

    def _normalize_key(self, key: Any) -> DegreeKey:
        if self.manifold == Manifold.S2XS2:
            k1, k2 = key
            if k1 < 0 or k2 < 0:
                raise PreconditionError(f"Negative degree in {key}")
            return (int(k1), int(k2))
        if int(key) < 0:
            raise PreconditionError(f"Negative degree {key}")
        return int(key)

    def block_shape(self, key: DegreeKey) -> Tuple[int, ...]:
        """Shape of the coefficient block for ``key``."""
        if self.manifold == Manifold.S2:
            return (2 * int(key) + 1,)  # type: ignore[arg-type]
        if self.manifold == Manifold.SO3:
            width = 2 * int(key) + 1  # type: ignore[arg-type]
            return (width, width)
        k1, k2 = key  # type: ignore[misc]
        return (2 * k1 + 1, 2 * k2 + 1)

    def key_eigenvalue(self, key: DegreeKey) -> float:
        """Eigenvalue of the operator on the block for ``key``."""
        if self.manifold == Manifold.S2XS2:
            k1, k2 = key  # type: ignore[misc]
            return degree_eigenvalue(k1) + degree_eigenvalue(k2)
        return degree_eigenvalue(int(key))  # type: ignore[arg-type]

    def key_norm_sq(self, key: DegreeKey) -> float:
        """Squared L2 norm of one basis function in block ``key``."""
        if self.manifold == Manifold.SO3:
            return 1.0 / (2 * int(key) + 1)  # type: ignore[arg-type]
        return 1.0

    def block(self, key: DegreeKey) -> np.ndarray:
        """Block for ``key``; zeros when absent."""
        key = self._normalize_key(key)
        if key in self.blocks:
            return self.blocks[key]
        return np.zeros(self.block_shape(key))

    @property
    def max_degree(self) -> int:
        """Largest degree appearing in any stored block (-1 when empty)."""
        if not self.blocks:
            return -1
        if self.manifold == Manifold.S2XS2:
            return max(max(key) for key in self.blocks)  # type: ignore[arg-type]
        return max(int(key) for key in self.blocks)  # type: ignore[arg-type]

    def is_delta(self, tol: float = 1e-12) -> bool:
        """True when all S2xS2 content sits on equal-degree pairs (k, k)."""
        if self.manifold != Manifold.S2XS2:
            return False
        return all(
            key[0] == key[1] or np.max(np.abs(block)) <= tol  # type: ignore[index]
            for key, block in self.blocks.items()
        )

    def entries(self) -> Iterator[Tuple[Tuple[int, ...], float]]:
        """Yield ``(index_tuple, value)`` for every stored coefficient (1-based orders)."""
        for key, block in self.blocks.items():
            for position, value in np.ndenumerate(block):
                orders = tuple(p + 1 for p in position)
                if self.manifold == Manifold.S2XS2:
                    yield (key[0], key[1]) + orders, float(value)  # type: ignore[index]
                else:
                    yield (int(key),) + orders, float(value)  # type: ignore[arg-type]

    def value(self, *index: int) -> float:
        """Coefficient at a 1-based index tuple (k, i), (k, i, j) or (k1, k2, i, j)."""
        if self.manifold == Manifold.S2XS2:
            k1, k2, i, j = index
            return float(self.block((k1, k2))[i - 1, j - 1])
        k = index[0]
        block = self.block(k)
        return float(block[tuple(p - 1 for p in index[1:])])

    @classmethod
    def from_entries(
        cls,
        manifold: Manifold,
        omega: float,
        entries: Mapping[Tuple[int, ...], float],
    ) -> "HarmonicCoefficients":
        """Build coefficients from a sparse ``index tuple -> value`` mapping.

        Index tuples are (k, i) on S2, (k, i, j) on SO(3) and (k1, k2, i, j) on
        S2xS2, with 1-based orders.
        """
        blocks: Dict[DegreeKey, np.ndarray] = {}
        for index, val in entries.items():
            if manifold == Manifold.S2XS2:
                k1, k2, i, j = index
                HarmonicIndex(k1, i)
                HarmonicIndex(k2, j)
                key: DegreeKey = (k1, k2)
                shape: Tuple[int, ...] = (2 * k1 + 1, 2 * k2 + 1)
                position: Tuple[int, ...] = (i - 1, j - 1)
            elif manifold == Manifold.SO3:
                k, i, j = index
                HarmonicIndex(k, i, j)
                key, shape, position = k, (2 * k + 1, 2 * k + 1), (i - 1, j - 1)
            else:
                k, i = index
                HarmonicIndex(k, i)
                key, shape, position = k, (2 * k + 1,), (i - 1,)
            blocks.setdefault(key, np.zeros(shape))[position] = val
        return cls(manifold=manifold, omega=omega, blocks=blocks)

    @classmethod
    def zeros(cls, manifold: Manifold, omega: float = 0.0) -> "HarmonicCoefficients":
        return cls(manifold=manifold, omega=omega, blocks={})


@dataclass(frozen=True)
class SobolevOrder:
    """Smoothness exponent t with operator scale a in (I - a*L)^{t/2}.

    Attributes:
        t: Smoothness exponent
        a: 1 on S2, 2 on S2xS2, 4 on SO(3)
    """

    t: float
    a: float = 1.0

    @classmethod
    def for_manifold(cls, manifold: Manifold, t: float) -> "SobolevOrder":
        return cls(t=t, a=manifold.sobolev_scale)


@dataclass(frozen=True, eq=False)
class GreatCircle:
    """Great circle with unit normal ``pole``, parameterized by cos(phi) e1 + sin(phi) e2."""

    pole: np.ndarray
    e1: np.ndarray = field(init=False)
    e2: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        pole = np.asarray(self.pole, dtype=float)
        pole = pole / np.linalg.norm(pole)
        helper = np.zeros(3)
        helper[int(np.argmin(np.abs(pole)))] = 1.0
        e1 = np.cross(helper, pole)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(pole, e1)
        object.__setattr__(self, "pole", pole)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)

    def points(self, phi: np.ndarray) -> np.ndarray:
        """Points u(phi) on the circle, shape ``(len(phi), 3)``."""
        phi = np.asarray(phi, dtype=float)[:, None]
        return np.cos(phi) * self.e1 + np.sin(phi) * self.e2


@dataclass(frozen=True)
class LatticeCertificate:
    """Separation and covering numbers of a lattice.

    Attributes:
        min_distance: Exact minimum pairwise geodesic distance (inf for one point)
        covering_radius: Covering radius measured on a deterministic test grid
        grid_density: Test-grid points per unit length used for covering
    """

    min_distance: float
    covering_radius: float
    grid_density: float

    def certifies(self, rho: float, tol: float = 1e-12) -> bool:
        """True when ``rho/2``-balls cover and ``rho/4``-balls are disjoint."""
        return self.min_distance >= rho / 2 - tol and self.covering_radius <= rho / 2 + tol


@dataclass(frozen=True, eq=False)
class Lattice:
    """Finite point set with separation/covering certificate.

    Attributes:
        manifold: Manifold tag
        points: S2 ``(N, 3)`` unit vectors; SO3 ``(N, 3, 3)`` rotation matrices;
            S2xS2 ``(N, 6)`` stacked unit vectors
        rho: Mesh parameter
        symmetric: Antipodally closed (S2 only)
        certificate: Separation/covering certificate
        factors: S2 factor lattices when built as a product on S2xS2
    """

    manifold: Manifold
    points: np.ndarray
    rho: float
    symmetric: bool
    certificate: LatticeCertificate
    factors: Optional[Tuple["Lattice", "Lattice"]] = None

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def certified(self) -> bool:
        return self.certificate.certifies(self.rho)

    def flat_points(self) -> np.ndarray:
        """Points as rows of reals: xyz, Euler angles (SO3) or x1..z2."""
        if self.manifold == Manifold.SO3:
            alpha, beta, gamma = matrix_to_euler(self.points)
            return np.stack([alpha, beta, gamma], axis=1)
        return np.asarray(self.points)


@dataclass(frozen=True, eq=False)
class VoronoiPartition:
    """Nearest-point assignment of quadrature-grid cells.

    Attributes:
        grid_points: Cell centres in the lattice's point representation
        grid_weights: Normalized cell measures (sum 1)
        owners: Index of the nearest lattice point for each cell
        masses: Total cell measure owned by each lattice point
    """

    grid_points: np.ndarray
    grid_weights: np.ndarray
    owners: np.ndarray
    masses: np.ndarray


@dataclass(frozen=True, eq=False)
class Cubature:
    """Positive-weight cubature on a lattice.

    Attributes:
        lattice: Nodes
        weights: Strictly positive weights summing to 1
        omega_exact: Exactness bandwidth. On S2xS2 exactness is per factor:
            every Y_{k1}(x)Y_{k2}(y) with k1(k1+1) and k2(k2+1) both <= omega_exact
        residual: Largest moment error achieved
    """

    lattice: Lattice
    weights: np.ndarray
    omega_exact: float
    residual: float

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float)
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def manifold(self) -> Manifold:
        return self.lattice.manifold


class FunctionalKind(str, Enum):
    """Kinds of measurement functionals."""

    POINT = "point"
    SYM_PAIR = "sympair"
    CIRCLE = "circle"
    HEMISPHERE = "hemi"
    SO3_CIRCLE = "so3circ"


@dataclass(frozen=True)
class Functional:
    """One measurement functional F_nu.

    Attributes:
        kind: Functional kind
        position: Point/pole (3 reals) or point pair (6 reals, S2xS2 point
            evaluation or SO(3) circle {g : g x = y})
    """

    kind: FunctionalKind
    position: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.position, dtype=float)
        expected = 6 if self.kind == FunctionalKind.SO3_CIRCLE else None
        if expected is not None and values.size != expected:
            raise PreconditionError(f"{self.kind.value} needs 6 coordinates, got {values.size}")
        if values.size not in (3, 6):
            raise PreconditionError(f"Functional position must have 3 or 6 reals, got {values.size}")
        if values.size == 6 and self.kind not in (FunctionalKind.POINT, FunctionalKind.SO3_CIRCLE):
            raise PreconditionError(f"{self.kind.value} takes a single sphere point")
        parts = values.reshape(-1, 3)
        parts = parts / np.linalg.norm(parts, axis=1, keepdims=True)
        object.__setattr__(self, "position", tuple(float(v) for v in parts.ravel()))

    @property
    def manifold(self) -> Manifold:
        if self.kind == FunctionalKind.SO3_CIRCLE:
            return Manifold.SO3
        if len(self.position) == 6:
            return Manifold.S2XS2
        return Manifold.S2

    @property
    def first(self) -> np.ndarray:
        return np.asarray(self.position[:3])

    @property
    def second(self) -> np.ndarray:
        return np.asarray(self.position[3:])

    def canonical(self) -> np.ndarray:
        """Position in a form where geometrically equal functionals coincide.

        Circles and symmetric pairs do not change under p -> -p; SO(3) circles
        do not change under (x, y) -> (-x, -y).
        """
        values = np.asarray(self.position)
        if self.kind in (FunctionalKind.CIRCLE, FunctionalKind.SYM_PAIR, FunctionalKind.SO3_CIRCLE):
            first_nonzero = values[np.argmax(np.abs(values) > 1e-10)]
            if first_nonzero < 0:
                values = -values
        return values


@dataclass(frozen=True)
class FunctionalSet:
    """Pairwise distinct functionals on one manifold."""

    manifold: Manifold
    functionals: Tuple[Functional, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "functionals", tuple(self.functionals))
        for functional in self.functionals:
            if functional.manifold != self.manifold:
                raise PreconditionError(
                    f"Functional {functional.kind.value} acts on {functional.manifold.value}, "
                    f"set is on {self.manifold.value}"
                )
        seen: List[Tuple[FunctionalKind, np.ndarray]] = []
        for position, functional in enumerate(self.functionals):
            canon = functional.canonical()
            for kind, other in seen:
                if kind == functional.kind and np.max(np.abs(canon - other)) <= 1e-10:
                    raise PreconditionError(
                        f"Functional {position} duplicates an earlier {kind.value} functional"
                    )
            seen.append((functional.kind, canon))

    @property
    def size(self) -> int:
        return len(self.functionals)

    def __len__(self) -> int:
        return len(self.functionals)

    def __iter__(self) -> Iterator[Functional]:
        return iter(self.functionals)


@dataclass(frozen=True, eq=False)
class Spline:
    """Solved variational spline.

    Attributes:
        functionals: Functional set
        t: Smoothness exponent
        k_max: Truncation degree used for the Gram series
        alpha: Solution of the Gram system
        gram: Gram matrix (kept for diagnostics)
        coefficients: Spectral coefficients of the spline
        values: Target values v
    """

    functionals: FunctionalSet
    t: float
    k_max: int
    alpha: np.ndarray
    gram: np.ndarray
    coefficients: HarmonicCoefficients
    values: np.ndarray

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Spline values at ``points``, synthesized from its coefficients."""
        # deferred: core.spaces imports this module
        from .core.spaces import synthesize

        return synthesize(self.coefficients, points)


@dataclass(frozen=True, eq=False)
class SplineProblem:
    """Functionals with target values and a smoothness exponent, as read from a file."""

    functionals: FunctionalSet
    values: np.ndarray
    t: float


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Point samples of a function.

    Attributes:
        manifold: Manifold tag
        points: Points in array form ((N, 3), (N, 3, 3) or (N, 6))
        values: One value per point
    """

    manifold: Manifold
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.points) != len(self.values):
            raise PreconditionError(f"{len(self.points)} points for {len(self.values)} values")

    @property
    def size(self) -> int:
        return len(self.values)


class TransformKind(str, Enum):
    """Transforms with multiplier tables."""

    FUNK_RADON = "funk"
    HEMISPHERICAL = "hemi"
    SO3_RADON = "so3"


@dataclass(frozen=True, eq=False)
class MultiplierTable:
    """Per-degree multipliers of a transform.

    Attributes:
        transform: Transform tag
        n: Sphere dimension parameter
        values: values[k] is the multiplier of degree k
        calibrated: Absolute constant fixed by a geometric oracle
    """

    transform: TransformKind
    n: int
    values: np.ndarray
    calibrated: bool = True

    @property
    def k_max(self) -> int:
        return int(self.values.shape[0]) - 1

    @property
    def kernel_degrees(self) -> frozenset:
        return frozenset(int(k) for k in np.flatnonzero(self.values == 0.0))

    def __getitem__(self, k: int) -> float:
        if k > self.k_max:
            raise PreconditionError(f"Degree {k} beyond multiplier table range {self.k_max}")
        return float(self.values[k])


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Littlewood-Paley filters tabulated on degrees.

    Attributes:
        j_max: Finest level
        phi: phi[j, k] = Phi(2^{-2j} k(k+1)) for k = 0..k_max
    """

    j_max: int
    phi: np.ndarray

    @property
    def k_max(self) -> int:
        return int(self.phi.shape[1]) - 1


@dataclass(frozen=True, eq=False)
class FrameLevel:
    """One level of a Parseval frame.

    Attributes:
        j: Level index
        k_band: Highest degree with a nonzero filter value at this level
        cubature: Certified cubature carrying the atom centres and b_{j,k}
    """

    j: int
    k_band: int
    cubature: Cubature

    @property
    def centres(self) -> np.ndarray:
        return self.cubature.lattice.points

    @property
    def weights(self) -> np.ndarray:
        return self.cubature.weights


@dataclass(frozen=True, eq=False)
class FrameSystem:
    """Parseval frame on S2 assembled from per-level cubatures."""

    filter_bank: FilterBank
    levels: Tuple[FrameLevel, ...]
    lattice_constant: float

    @property
    def j_max(self) -> int:
        return self.filter_bank.j_max

    @property
    def coverage(self) -> float:
        """Eigenvalue bound below which the frame is Parseval."""
        return float(4**self.j_max)

    @property
    def atom_count(self) -> int:
        return sum(level.cubature.lattice.size for level in self.levels)


@dataclass(frozen=True)
class IterationTrace:
    """Record of an iterative reconstruction.

    Attributes:
        method: "voronoi" or "frame"
        errors: Per-step L2 error against the truth, or update norms when no truth is known
        update_norms: Norm of each correction step
        contraction: Contraction estimate (epsilon or eta)
        steps: Number of steps performed
        converged: Whether the tolerance was reached
    """

    method: str
    errors: Tuple[float, ...]
    update_norms: Tuple[float, ...]
    contraction: float
    steps: int
    converged: bool

    def ratios(self) -> List[float]:
        """Successive error ratios e_{m+1}/e_m (zero-guarded)."""
        return [
            b / a if a > 0 else 0.0 for a, b in zip(self.errors[:-1], self.errors[1:])
        ]


@dataclass(frozen=True)
class OptimalityReport:
    """Outcome of the randomized spline optimality check."""

    trials: int
    minimality_violations: int
    max_orthogonality_defect: float
    max_center_distance: float
    empirical_diameter: float

    @property
    def passed(self) -> bool:
        return self.minimality_violations == 0 and (
            self.trials == 0 or self.max_center_distance <= 0.5 * self.empirical_diameter + 1e-10
        )


@dataclass(frozen=True, eq=False)
class LocalizationProfile:
    """Decay diagnostics of a frame atom.

    Attributes:
        level: Level j
        atom: Atom index k
        distances: Geodesic distances from the atom centre
        values: |psi_{j,k}| at those distances
        normalized_sup: N -> sup |psi| (1 + 2^j d)^N 2^{-2j}
    """

    level: int
    atom: int
    distances: np.ndarray
    values: np.ndarray
    normalized_sup: Dict[int, float]


@dataclass(frozen=True)
class DiscreteInversion:
    """Result of the discrete Funk-Radon inversion.

    Attributes:
        coefficients: Recovered even coefficients
        odd_residual: Largest odd-degree coefficient of the data
        vanishing_data: Data was numerically zero (e.g. odd input)
    """

    coefficients: HarmonicCoefficients
    odd_residual: float
    vanishing_data: bool


@dataclass
class ExperimentConfig:
    """Effective configuration of a command run.

    Attributes:
        seed: Random seed for lattice templates and randomized checks
        output_directory: Directory for outputs without an explicit path
        threads: Worker cap for row-parallel assembly
        max_degree: Cap for adaptive spline truncation
        wigner_max_degree: Cap for Wigner polynomial degrees
        grid_factor: Covering-grid density relative to 1/rho
        density_constant: c in the cubature density precondition rho <= c omega^{-1/2}
        tolerances: Named numerical tolerances
        parameters: Command parameters recorded in the manifest
    """

    seed: int = 0
    output_directory: Path = field(default_factory=lambda: Path("."))
    threads: int = 1
    max_degree: int = 512
    wigner_max_degree: int = 128
    grid_factor: float = 4.0
    density_constant: float = 3.0
    tolerances: Dict[str, float] = field(default_factory=dict)
    parameters: Dict[str, Any] = field(default_factory=dict)

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def to_manifest(self, command: str, version: str) -> Dict[str, Any]:
        """Record all effective values for reproducibility (no timestamps)."""
        return {
            "command": command,
            "version": version,
            "seed": self.seed,
            "threads": self.threads,
            "max_degree": self.max_degree,
            "wigner_max_degree": self.wigner_max_degree,
            "grid_factor": self.grid_factor,
            "density_constant": self.density_constant,
            "tolerances": dict(sorted(self.tolerances.items())),
            "parameters": {key: _manifest_value(val) for key, val in sorted(self.parameters.items())},
        }


def _manifest_value(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_manifest_value(v) for v in value]
    return value
