"""Metric rho-lattices on S2, S2xS2 and SO(3).

Lattices are built from a deterministic quasi-uniform template, thinned
greedily until points are ``rho/2`` apart and then filled greedily at the
worst-covered grid points until the covering radius is at most ``rho/2``.
Covering radii are measured against the nodes of a product quadrature grid.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..errors import LatticeCertificationError, PreconditionError
from ..models import GreatCircle, Lattice, LatticeCertificate, Manifold, VoronoiPartition
from ..protocols import MetricSpace
from ..rotations import euler_to_matrix, quaternions, random_rotation, rotation_distance
from .quadrature import product_sphere_rule, so3_product_rule, sphere_product_rule
from .spaces import check_points

logger = logging.getLogger(__name__)

MIN_RHO = 1e-4
MIN_GRID_DENSITY = 10.0
DEFAULT_GRID_FACTOR = 4.0
TEMPLATE_SPACING = 0.6
MAX_FILL_ROUNDS = 64
_TIE_TOL = 1e-12


def _sphere_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return np.arctan2(cross, np.sum(a * b, axis=-1))


class SphereMetric:
    """Great-circle distance on S2."""

    manifold = Manifold.S2
    copies = 1

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _sphere_distance(a, b)

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, 3)

    def embed(self, points: np.ndarray) -> np.ndarray:
        return self.coordinates(points)

    def chord_radius(self, geodesic: float) -> float:
        return 2.0 * math.sin(min(geodesic, math.pi) / 2.0)


class ProjectiveSphereMetric(SphereMetric):
    """Distance between antipodal pairs ``{x, -x}``; used to build symmetric lattices."""

    copies = 2

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = _sphere_distance(a, b)
        return np.minimum(d, math.pi - d)

    def embed(self, points: np.ndarray) -> np.ndarray:
        xyz = self.coordinates(points)
        return np.vstack([xyz, -xyz])


class RotationMetric:
    """Rotation angle of ``a^T b`` on SO(3), searched through unit quaternions ``+-q``."""

    manifold = Manifold.SO3
    copies = 2

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return rotation_distance(a, b)

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        return quaternions(points)

    def embed(self, points: np.ndarray) -> np.ndarray:
        q = self.coordinates(points)
        return np.vstack([q, -q])

    def chord_radius(self, geodesic: float) -> float:
        return 2.0 * math.sin(min(geodesic, math.pi) / 4.0)


class ProductSphereMetric:
    """``sqrt(d1^2 + d2^2)`` on S2xS2."""

    manifold = Manifold.S2XS2
    copies = 1

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        d1 = _sphere_distance(a[..., :3], b[..., :3])
        d2 = _sphere_distance(a[..., 3:], b[..., 3:])
        return np.hypot(d1, d2)

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, 6)

    def embed(self, points: np.ndarray) -> np.ndarray:
        return self.coordinates(points)

    def chord_radius(self, geodesic: float) -> float:
        # each factor chord is at most its arc length
        return float(geodesic)


def metric_for(manifold: Manifold, projective: bool = False) -> MetricSpace:
    """Metric used for lattices on ``manifold``."""
    if manifold == Manifold.S2:
        return ProjectiveSphereMetric() if projective else SphereMetric()
    if projective:
        raise PreconditionError("Symmetric lattices are only defined on S2")
    if manifold == Manifold.SO3:
        return RotationMetric()
    return ProductSphereMetric()


def geodesic_distance(manifold: Manifold, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geodesic distance between (batches of) points on ``manifold``."""
    return metric_for(manifold).distance(a, b)


def nearest_points(
    metric: MetricSpace,
    points: np.ndarray,
    queries: np.ndarray,
    chunk_size: int = 65536,
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact nearest lattice point for every query, ties to the lowest index.

    Args:
        metric: Metric to measure in
        points: Lattice points
        queries: Query points

    Returns:
        Tuple of owner indices and geodesic distances
    """
    points = np.asarray(points, dtype=float)
    queries = np.asarray(queries, dtype=float)
    n = points.shape[0]
    total = n * metric.copies
    tree = cKDTree(metric.embed(points))
    k = min(total, 8)
    owners = np.empty(queries.shape[0], dtype=int)
    distances = np.empty(queries.shape[0])

    for start in range(0, queries.shape[0], chunk_size):
        block = queries[start: start + chunk_size]
        coords = metric.coordinates(block)
        chord, cand = tree.query(coords, k=k)
        chord = np.asarray(chord).reshape(coords.shape[0], k)
        owner = np.asarray(cand).reshape(coords.shape[0], k) % n
        geo = metric.distance(block[:, None], points[owner])
        best = geo.min(axis=1)
        tied = np.where(geo <= best[:, None] + _TIE_TOL, owner, n)
        idx = tied.min(axis=1)

        if k < total:
            # points outside the k candidates are exact misses only if their chord could be small enough
            unsure = np.flatnonzero(
                chord[:, -1] <= np.array([metric.chord_radius(b) for b in best]) + _TIE_TOL
            )
            for row in unsure:
                radius = metric.chord_radius(float(best[row])) + _TIE_TOL
                ball = np.unique(np.asarray(tree.query_ball_point(coords[row], radius), dtype=int) % n)
                d = metric.distance(block[row][None], points[ball])
                best_row = d.min()
                best[row] = best_row
                idx[row] = ball[d <= best_row + _TIE_TOL].min()

        owners[start: start + block.shape[0]] = idx
        distances[start: start + block.shape[0]] = best
    return owners, distances


def close_pairs(metric: MetricSpace, points: np.ndarray, radius: float) -> np.ndarray:
    """Pairs ``(i, j)``, ``i < j``, with geodesic distance strictly below ``radius``."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n < 2:
        return np.zeros((0, 2), dtype=int)
    tree = cKDTree(metric.embed(points))
    raw = tree.query_pairs(metric.chord_radius(radius) + _TIE_TOL, output_type="ndarray")
    if raw.size == 0:
        return np.zeros((0, 2), dtype=int)
    pairs = np.sort(raw % n, axis=1)
    pairs = np.unique(pairs[pairs[:, 0] != pairs[:, 1]], axis=0)
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=int)
    d = metric.distance(points[pairs[:, 0]], points[pairs[:, 1]])
    return pairs[d < radius]


def minimum_distance(metric: MetricSpace, points: np.ndarray) -> float:
    """Exact minimum pairwise geodesic distance (inf for fewer than two points)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n < 2:
        return math.inf
    tree = cKDTree(metric.embed(points))
    k = min(n * metric.copies, metric.copies + 1)
    _, cand = tree.query(metric.coordinates(points), k=k)
    owner = np.asarray(cand).reshape(n, k) % n
    geo = metric.distance(points[:, None], points[owner])
    bound = float(np.min(np.where(owner != np.arange(n)[:, None], geo, np.inf)))
    pairs = close_pairs(metric, points, bound + 1e-9)
    if pairs.size == 0:
        return bound
    return float(np.min(metric.distance(points[pairs[:, 0]], points[pairs[:, 1]])))


def covering_grid(manifold: Manifold, grid_density: float) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic quadrature grid with spacing about ``1 / grid_density``.

    On S2xS2 each factor grid uses half the density.

    Returns:
        Tuple of grid points and normalized cell weights (sum 1)
    """
    if grid_density < MIN_GRID_DENSITY:
        raise PreconditionError(
            f"Grid density must be at least {MIN_GRID_DENSITY} per unit length, got {grid_density}"
        )
    if manifold == Manifold.S2:
        return sphere_product_rule(int(math.ceil(math.pi * grid_density)))
    if manifold == Manifold.SO3:
        return so3_product_rule(
            int(math.ceil(math.pi * grid_density)), int(math.ceil(2.0 * math.pi * grid_density))
        )
    return product_sphere_rule(int(math.ceil(math.pi * grid_density / 2.0)))


def default_grid_density(rho: float, grid_factor: float = DEFAULT_GRID_FACTOR) -> float:
    return max(MIN_GRID_DENSITY, grid_factor / rho)


def fibonacci_sphere(n: int) -> np.ndarray:
    """Generalized spiral: ``n`` quasi-uniform unit vectors."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _sphere_template(rho: float, seed: int) -> np.ndarray:
    n = max(1, int(math.ceil(4.0 * math.pi / (TEMPLATE_SPACING * rho) ** 2)))
    return fibonacci_sphere(n) @ random_rotation(seed).T


def _rotation_template(rho: float, seed: int) -> np.ndarray:
    spacing = TEMPLATE_SPACING * rho
    n_angle = max(1, int(math.ceil(2.0 * math.pi / spacing)))
    n_beta = max(1, int(math.ceil(2.0 / spacing)))
    cos_beta = 1.0 - (2.0 * np.arange(n_beta) + 1.0) / n_beta
    angles = 2.0 * math.pi * (np.arange(n_angle) + 0.5) / n_angle
    b, a, g = np.meshgrid(np.arccos(cos_beta), angles, angles, indexing="ij")
    matrices = euler_to_matrix(a.ravel(), b.ravel(), g.ravel())
    return random_rotation(seed) @ matrices


def _product_template(rho: float, seed: int) -> np.ndarray:
    first = _sphere_template(rho, seed)
    second = _sphere_template(rho, seed + 1)
    return np.hstack([np.repeat(first, second.shape[0], axis=0), np.tile(second, (first.shape[0], 1))])


def _thin(metric: MetricSpace, points: np.ndarray, separation: float) -> np.ndarray:
    """Greedy thinning in input order: drop points closer than ``separation`` to a kept one."""
    pairs = close_pairs(metric, points, separation)
    earlier: Dict[int, List[int]] = defaultdict(list)
    for i, j in pairs:
        earlier[int(j)].append(int(i))
    keep = np.ones(points.shape[0], dtype=bool)
    for j in range(points.shape[0]):
        if any(keep[i] for i in earlier.get(j, ())):
            keep[j] = False
    return points[keep]


def _fill(
    metric: MetricSpace,
    points: np.ndarray,
    grid: np.ndarray,
    separation: float,
    covering: float,
) -> np.ndarray:
    """Greedy insertion at worst-covered grid points until the grid is covered.

    Raises:
        LatticeCertificationError: If covering is not reached after a bounded number of rounds
    """
    worst = math.inf
    for round_index in range(MAX_FILL_ROUNDS):
        _, dist = nearest_points(metric, points, grid)
        worst = float(dist.max())
        if worst <= covering + _TIE_TOL:
            logger.debug(f"Covering reached after {round_index} insertion rounds ({points.shape[0]} points)")
            return points
        uncovered = np.flatnonzero(dist > covering)
        uncovered = uncovered[np.argsort(-dist[uncovered], kind="stable")]
        added = _thin(metric, grid[uncovered], separation)
        points = np.concatenate([points, added], axis=0)
    raise LatticeCertificationError(
        f"Covering radius {worst:.6g} still above {covering:.6g} after {MAX_FILL_ROUNDS} rounds",
        covering_radius=worst,
    )


def verify_lattice(lattice: Lattice, grid_density: float) -> LatticeCertificate:
    """Recompute the separation/covering certificate of ``lattice``.

    Args:
        lattice: Lattice to check (never modified)
        grid_density: Covering grid points per unit length (>= 10)

    Returns:
        Fresh certificate
    """
    metric = metric_for(lattice.manifold)
    min_distance = minimum_distance(metric, lattice.points)
    if lattice.factors is not None:
        # the nearest point of a product lattice splits over the factors
        first = verify_lattice(lattice.factors[0], grid_density)
        second = verify_lattice(lattice.factors[1], grid_density)
        covering = math.hypot(first.covering_radius, second.covering_radius)
    else:
        grid, _ = covering_grid(lattice.manifold, grid_density)
        _, dist = nearest_points(metric, lattice.points, grid)
        covering = float(dist.max())
    logger.debug(
        f"Verified {lattice.manifold.value} lattice of {lattice.size} points: "
        f"min distance {min_distance:.6g}, covering radius {covering:.6g}"
    )
    return LatticeCertificate(min_distance=min_distance, covering_radius=covering, grid_density=grid_density)


def generate_lattice(
    manifold: Manifold,
    rho: float,
    symmetric: bool = False,
    seed: int = 0,
    grid_factor: float = DEFAULT_GRID_FACTOR,
) -> Lattice:
    """Build a certified rho-lattice.

    Args:
        manifold: Manifold tag
        rho: Mesh parameter
        symmetric: Antipodally closed lattice (S2 only)
        seed: Seed of the random rotation applied to the template
        grid_factor: Covering grid density relative to ``1 / rho``

    Returns:
        Lattice whose certificate satisfies both conditions

    Raises:
        PreconditionError: If rho is too small or symmetry is requested off S2
        LatticeCertificationError: If covering fails
    """
    if not rho > MIN_RHO:
        raise PreconditionError(f"rho must exceed {MIN_RHO}, got {rho}")
    metric = metric_for(manifold, projective=symmetric)
    density = default_grid_density(rho, grid_factor)
    grid, _ = covering_grid(manifold, density)

    if manifold == Manifold.S2:
        template = _sphere_template(rho, seed)
        if symmetric:
            template = template[template @ np.array([0.0, 0.0, 1.0]) >= 0.0]
    elif manifold == Manifold.SO3:
        template = _rotation_template(rho, seed)
    else:
        template = _product_template(rho, seed)

    separation = covering = rho / 2.0
    points = _thin(metric, template, separation)
    points = _fill(metric, points, grid, separation, covering)
    if symmetric:
        points = np.concatenate([points, -points], axis=0)

    lattice = Lattice(
        manifold=manifold,
        points=points,
        rho=rho,
        symmetric=symmetric,
        certificate=LatticeCertificate(math.nan, math.nan, density),
    )
    certificate = verify_lattice(lattice, density)
    if not certificate.certifies(rho):
        raise LatticeCertificationError(
            f"Generated lattice fails certification (min distance {certificate.min_distance:.6g}, "
            f"covering {certificate.covering_radius:.6g}, rho {rho})",
            covering_radius=certificate.covering_radius,
        )
    logger.info(f"Generated {manifold.value} lattice with {points.shape[0]} points for rho={rho}")
    return Lattice(
        manifold=manifold, points=points, rho=rho, symmetric=symmetric, certificate=certificate
    )


def _antipode_indices(points: np.ndarray) -> np.ndarray:
    """Index of each point's antipode, -1 where absent."""
    tree = cKDTree(points)
    dist, idx = tree.query(-points, k=1)
    return np.where(dist <= 1e-9, idx, -1)


def lattice_from_points(
    manifold: Manifold,
    points: np.ndarray,
    rho: float,
    symmetric: bool = False,
    grid_density: Optional[float] = None,
) -> Lattice:
    """Wrap explicit points as a lattice and attach a fresh certificate.

    The certificate may fail to certify ``rho``; check ``Lattice.certified``.

    Raises:
        PreconditionError: On malformed points or a symmetric flag without antipodes
    """
    points = check_points(manifold, points)
    if points.shape[0] == 0:
        raise PreconditionError("A lattice needs at least one point")
    if symmetric:
        if manifold != Manifold.S2:
            raise PreconditionError("Symmetric lattices are only defined on S2")
        if np.any(_antipode_indices(points) < 0):
            raise PreconditionError("Symmetric lattice is missing antipodes")
    density = grid_density or default_grid_density(rho)
    draft = Lattice(manifold, points, rho, symmetric, LatticeCertificate(math.nan, math.nan, density))
    return Lattice(manifold, points, rho, symmetric, verify_lattice(draft, density))


def product_lattice(first: Lattice, second: Lattice, rho: Optional[float] = None) -> Lattice:
    """All pairs ``(x, y)`` of two S2 lattices as an S2xS2 lattice.

    The certificate is derived from the factor certificates in the product
    metric. The minimum distance ``min(d1, d2)`` is attained by pairs sharing
    a factor point. The covering radius ``hypot(r1, r2)`` is only an upper
    bound, so the default ``rho`` may overstate the mesh and the separation
    ratio ``min_distance / rho`` can fall below the factor ratios.

    Args:
        first: Lattice for the first factor
        second: Lattice for the second factor
        rho: Mesh parameter (default: twice the covering radius)
    """
    if first.manifold != Manifold.S2 or second.manifold != Manifold.S2:
        raise PreconditionError("Product lattices need two S2 lattices")
    n1, n2 = first.size, second.size
    points = np.hstack([np.repeat(first.points, n2, axis=0), np.tile(second.points, (n1, 1))])
    density = min(first.certificate.grid_density, second.certificate.grid_density)
    covering = math.hypot(first.certificate.covering_radius, second.certificate.covering_radius)
    certificate = LatticeCertificate(
        min_distance=min(first.certificate.min_distance, second.certificate.min_distance),
        covering_radius=covering,
        grid_density=density,
    )
    return Lattice(
        manifold=Manifold.S2XS2,
        points=points,
        rho=rho if rho is not None else 2.0 * covering,
        symmetric=False,
        certificate=certificate,
        factors=(first, second),
    )


def icosahedral_lattice(rho: float = 1.4) -> Lattice:
    """The 12 icosahedron vertices as a symmetric S2 lattice.

    Minimum distance is ``arctan(2)`` and the covering radius about 0.652,
    so ``rho`` in [1.31, 2.21] is certified.
    """
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    base = []
    for a in (1.0, -1.0):
        for b in (golden, -golden):
            base.extend([(0.0, a, b), (a, b, 0.0), (b, 0.0, a)])
    points = np.asarray(base)
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    return lattice_from_points(Manifold.S2, points, rho, symmetric=True)


def dual_circles(lattice: Lattice) -> List[GreatCircle]:
    """One great circle per antipodal pair ``{x, -x}``, with pole ``x``.

    Raises:
        PreconditionError: If the lattice is not symmetric
    """
    if lattice.manifold != Manifold.S2 or not lattice.symmetric:
        raise PreconditionError("Dual circles need a symmetric S2 lattice")
    antipodes = _antipode_indices(np.asarray(lattice.points))
    return [
        GreatCircle(pole=np.asarray(lattice.points[i]))
        for i in range(lattice.size)
        if i < antipodes[i]
    ]


def voronoi_partition(lattice: Lattice, grid_density: Optional[float] = None) -> VoronoiPartition:
    """Assign the cells of a fine quadrature grid to their nearest lattice point.

    Ties go to the lowest point index. When some point owns no cell the grid
    is refined (up to twice) before giving up with a warning.
    """
    metric = metric_for(lattice.manifold)
    density = grid_density or default_grid_density(lattice.rho, 2.0 * DEFAULT_GRID_FACTOR)
    for _ in range(3):
        grid, weights = covering_grid(lattice.manifold, density)
        owners, _ = nearest_points(metric, lattice.points, grid)
        masses = np.bincount(owners, weights=weights, minlength=lattice.size)
        if np.all(masses > 0):
            break
        density *= 2.0
    else:
        logger.warning(f"{int(np.sum(masses <= 0))} lattice points own no Voronoi cell")
    return VoronoiPartition(grid_points=grid, grid_weights=weights, owners=owners, masses=masses)
