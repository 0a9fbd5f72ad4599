"""Bandlimited spaces: synthesis, analysis, Sobolev norms and projections.

Internally coefficients are flattened into vectors over an orthonormal basis
("layout"): Y_k^i on S2, sqrt(2k+1) T_k^{ij} on SO(3) and
Y_{k1}^i(x) Y_{k2}^j(y) on S2xS2, degree blocks in increasing order.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from ..errors import PreconditionError
from ..models import (
    BANDWIDTH_SLACK,
    DegreeKey,
    HarmonicCoefficients,
    Manifold,
    SobolevOrder,
    degree_eigenvalue,
    max_degree_for,
)
from .harmonics import (
    DEFAULT_WIGNER_MAX_DEGREE,
    sph_harmonic_blocks,
    sph_harmonic_matrix,
    wigner_matrices,
)

logger = logging.getLogger(__name__)


def degree_bandwidth(k: int) -> float:
    """Smallest bandwidth containing degree k."""
    return degree_eigenvalue(k)


def layout_keys(manifold: Manifold, k_max: int) -> List[DegreeKey]:
    """Degree keys of the layout with per-factor degree cap ``k_max``."""
    if manifold == Manifold.S2XS2:
        return [(k1, k2) for k1 in range(k_max + 1) for k2 in range(k_max + 1)]
    return list(range(k_max + 1))


def key_size(manifold: Manifold, key: DegreeKey) -> int:
    """Number of coefficients in the block of ``key``."""
    if manifold == Manifold.S2:
        return 2 * int(key) + 1  # type: ignore[arg-type]
    if manifold == Manifold.SO3:
        return (2 * int(key) + 1) ** 2  # type: ignore[arg-type]
    k1, k2 = key  # type: ignore[misc]
    return (2 * k1 + 1) * (2 * k2 + 1)


def layout_dimension(manifold: Manifold, k_max: int) -> int:
    """Length of layout vectors."""
    return sum(key_size(manifold, key) for key in layout_keys(manifold, k_max))


def layout_eigenvalues(manifold: Manifold, k_max: int) -> np.ndarray:
    """Operator eigenvalue of every layout entry."""
    parts = []
    for key in layout_keys(manifold, k_max):
        if manifold == Manifold.S2XS2:
            lam = degree_eigenvalue(key[0]) + degree_eigenvalue(key[1])  # type: ignore[index]
        else:
            lam = degree_eigenvalue(int(key))  # type: ignore[arg-type]
        parts.append(np.full(key_size(manifold, key), lam))
    return np.concatenate(parts) if parts else np.zeros(0)


def check_points(manifold: Manifold, points: np.ndarray) -> np.ndarray:
    """Validate a batch of points for ``manifold`` and return it as an array.

    Raises:
        PreconditionError: On shape mismatch or non-unit / non-rotation points
    """
    array = np.asarray(points, dtype=float)
    if manifold == Manifold.SO3:
        if array.ndim == 2 and array.shape == (3, 3):
            array = array[None]
        if array.ndim != 3 or array.shape[1:] != (3, 3):
            raise PreconditionError(f"SO3 points must be (N, 3, 3) matrices, got {array.shape}")
        gram = np.einsum("nki,nkj->nij", array, array)
        if np.max(np.abs(gram - np.eye(3)), initial=0.0) > 1e-9:
            raise PreconditionError("SO3 points must be orthogonal matrices")
        return array
    width = manifold.point_width
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2 or array.shape[1] != width:
        raise PreconditionError(
            f"{manifold.value} points need {width} coordinates, got shape {array.shape}"
        )
    norms = np.linalg.norm(array.reshape(array.shape[0], -1, 3), axis=2)
    if np.max(np.abs(norms - 1.0), initial=0.0) > 1e-10:
        raise PreconditionError(f"{manifold.value} points must be built from unit vectors")
    return array


def basis_matrix(
    manifold: Manifold,
    k_max: int,
    points: np.ndarray,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> np.ndarray:
    """Orthonormal basis values at ``points``, shape ``(N, layout_dimension)``."""
    points = check_points(manifold, points)
    if manifold == Manifold.S2:
        return sph_harmonic_matrix(k_max, points)
    if manifold == Manifold.SO3:
        columns = []
        for k in range(k_max + 1):
            block = wigner_matrices(k, points, wigner_max_degree) * np.sqrt(2 * k + 1)
            columns.append(block.reshape(points.shape[0], -1))
        return np.concatenate(columns, axis=1)
    first = dict(sph_harmonic_blocks(k_max, points[:, :3]))
    second = dict(sph_harmonic_blocks(k_max, points[:, 3:]))
    columns = [
        np.einsum("ni,nj->nij", first[k1], second[k2]).reshape(points.shape[0], -1)
        for k1, k2 in layout_keys(manifold, k_max)  # type: ignore[misc]
    ]
    return np.concatenate(columns, axis=1)


def _block_scale(manifold: Manifold, key: DegreeKey) -> float:
    # SO(3) coefficients refer to T_k^{ij}; the layout uses sqrt(2k+1) T_k^{ij}
    if manifold == Manifold.SO3:
        return float(np.sqrt(2 * int(key) + 1))  # type: ignore[arg-type]
    return 1.0


def layout_k_max(c: HarmonicCoefficients) -> int:
    """Per-factor degree cap of the layout needed for ``c``."""
    return max(c.max_degree, max_degree_for(c.omega) if c.manifold != Manifold.S2XS2 else 0, 0)


def to_vector(c: HarmonicCoefficients, k_max: int) -> np.ndarray:
    """Flatten ``c`` into orthonormal-basis coordinates of the ``k_max`` layout.

    Raises:
        PreconditionError: If ``c`` has content above ``k_max``
    """
    if c.max_degree > k_max:
        raise PreconditionError(f"Coefficients reach degree {c.max_degree} above layout {k_max}")
    parts = []
    for key in layout_keys(c.manifold, k_max):
        parts.append(c.block(key).ravel() / _block_scale(c.manifold, key))
    return np.concatenate(parts)


def from_vector(
    manifold: Manifold,
    vector: np.ndarray,
    k_max: int,
    omega: float,
) -> HarmonicCoefficients:
    """Inverse of :func:`to_vector`; blocks above ``omega`` or identically zero are dropped."""
    blocks: Dict[DegreeKey, np.ndarray] = {}
    offset = 0
    shell = HarmonicCoefficients.zeros(manifold, omega)
    for key in layout_keys(manifold, k_max):
        size = key_size(manifold, key)
        chunk = np.asarray(vector[offset: offset + size], dtype=float)
        offset += size
        if shell.key_eigenvalue(key) > omega + BANDWIDTH_SLACK or not np.any(chunk):
            continue
        blocks[key] = chunk.reshape(shell.block_shape(key)) * _block_scale(manifold, key)
    return HarmonicCoefficients(manifold=manifold, omega=omega, blocks=blocks)


def synthesize(
    c: HarmonicCoefficients,
    pts: np.ndarray,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> np.ndarray:
    """Evaluate the function with coefficients ``c`` at ``pts``.

    Raises:
        PreconditionError: If the points do not live on ``c.manifold``
    """
    points = check_points(c.manifold, pts)
    if not c.blocks:
        return np.zeros(points.shape[0])
    k_max = c.max_degree
    if c.manifold == Manifold.S2:
        values = np.zeros(points.shape[0])
        for k, block in sph_harmonic_blocks(k_max, points):
            if k in c.blocks:
                values += block @ c.blocks[k]
        return values
    if c.manifold == Manifold.SO3:
        values = np.zeros(points.shape[0])
        for k, block in c.blocks.items():
            values += np.einsum("nij,ij->n", wigner_matrices(int(k), points, wigner_max_degree), block)
        return values
    first = dict(sph_harmonic_blocks(k_max, points[:, :3]))
    second = dict(sph_harmonic_blocks(k_max, points[:, 3:]))
    values = np.zeros(points.shape[0])
    for (k1, k2), block in c.blocks.items():  # type: ignore[misc]
        values += np.einsum("ni,ij,nj->n", first[k1], block, second[k2])
    return values


def required_exactness(manifold: Manifold, omega: float) -> float:
    """Cubature exactness needed to integrate products of two E_omega functions.

    On S2xS2 ``omega`` is the eigenvalue-sum bandwidth and the result is the
    per-factor exactness.
    """
    k = max_degree_for(omega)
    return degree_bandwidth(2 * max(k, 0))


def analyze(
    points: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    omega: float,
    manifold: Manifold,
    exactness: Optional[float],
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> HarmonicCoefficients:
    """Fourier coefficients of f in E_omega from weighted samples.

    Args:
        points: Cubature nodes
        values: Samples f(points)
        weights: Cubature weights
        omega: Bandwidth of f
        manifold: Manifold tag
        exactness: Certified exactness bandwidth of the cubature (None if uncertified)

    Returns:
        Coefficients ``c = sum_nu mu_nu f(x_nu) u(x_nu)`` per basis function

    Raises:
        PreconditionError: If weights are not positive, the cubature is not
            certified or its exactness is below the product requirement
    """
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    if weights.size == 0 or np.any(weights <= 0):
        raise PreconditionError("Cubature weights must be strictly positive")
    if exactness is None:
        raise PreconditionError("Cubature certificate absent: exactness bandwidth unknown")
    needed = required_exactness(manifold, omega)
    if exactness + BANDWIDTH_SLACK < needed:
        raise PreconditionError(
            f"Cubature exact to {exactness} but analysis on E_{omega} needs exactness {needed}"
        )
    if values.shape[0] != weights.shape[0]:
        raise PreconditionError(f"{values.shape[0]} samples for {weights.shape[0]} weights")
    k_max = max_degree_for(omega)
    basis = basis_matrix(manifold, k_max, points, wigner_max_degree)
    vector = basis.T @ (weights * values)
    return from_vector(manifold, vector, k_max, omega)


def inner_product(
    a: HarmonicCoefficients,
    b: HarmonicCoefficients,
    order: Optional[SobolevOrder] = None,
) -> float:
    """L2 (or Sobolev, when ``order`` is given) inner product of two expansions."""
    if a.manifold != b.manifold:
        raise PreconditionError(f"Manifold mismatch: {a.manifold.value} vs {b.manifold.value}")
    total = 0.0
    for key in set(a.blocks) & set(b.blocks):
        weight = a.key_norm_sq(key)
        if order is not None:
            weight *= (1.0 + order.a * a.key_eigenvalue(key)) ** order.t
        total += weight * float(np.sum(a.blocks[key] * b.blocks[key]))
    return total


def l2_norm(c: HarmonicCoefficients) -> float:
    """L2 norm honouring basis norms (``||T_k^{ij}||^2 = 1/(2k+1)``)."""
    return float(np.sqrt(max(inner_product(c, c), 0.0)))


def sobolev_norm(c: HarmonicCoefficients, s: SobolevOrder) -> float:
    """``(sum (1 + a*lambda)^t c^2)^{1/2}`` with basis norms included."""
    return float(np.sqrt(max(inner_product(c, c, s), 0.0)))


def project_bandlimit(c: HarmonicCoefficients, omega: float) -> HarmonicCoefficients:
    """Orthogonal projection P_omega: drop blocks with eigenvalue above omega."""
    kept = {key: block for key, block in c.blocks.items() if c.key_eigenvalue(key) <= omega + BANDWIDTH_SLACK}
    return HarmonicCoefficients(manifold=c.manifold, omega=min(omega, c.omega), blocks=kept)


def weyl_dimension(manifold: Manifold, omega: float) -> int:
    """Exact dimension of E_omega by counting eigenvalues with multiplicity."""
    if omega < 0:
        raise PreconditionError(f"Bandwidth must be non-negative, got {omega}")
    k_max = max_degree_for(omega)
    if manifold == Manifold.S2:
        return sum(2 * k + 1 for k in range(k_max + 1))
    if manifold == Manifold.SO3:
        return sum((2 * k + 1) ** 2 for k in range(k_max + 1))
    return sum(
        (2 * k1 + 1) * (2 * k2 + 1)
        for k1 in range(k_max + 1)
        for k2 in range(k_max + 1)
        if degree_eigenvalue(k1) + degree_eigenvalue(k2) <= omega + BANDWIDTH_SLACK
    )


def linear_combination(
    a: HarmonicCoefficients,
    b: HarmonicCoefficients,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> HarmonicCoefficients:
    """``alpha * a + beta * b`` with bandwidth ``max(a.omega, b.omega)``."""
    if a.manifold != b.manifold:
        raise PreconditionError(f"Manifold mismatch: {a.manifold.value} vs {b.manifold.value}")
    blocks: Dict[DegreeKey, np.ndarray] = {}
    for key in set(a.blocks) | set(b.blocks):
        blocks[key] = alpha * a.block(key) + beta * b.block(key)
    return HarmonicCoefficients(manifold=a.manifold, omega=max(a.omega, b.omega), blocks=blocks)


def scale(c: HarmonicCoefficients, factor: float) -> HarmonicCoefficients:
    return HarmonicCoefficients(
        manifold=c.manifold,
        omega=c.omega,
        blocks={key: factor * block for key, block in c.blocks.items()},
    )


def max_abs_difference(a: HarmonicCoefficients, b: HarmonicCoefficients) -> float:
    """Largest coefficient-wise difference."""
    diff = linear_combination(a, b, 1.0, -1.0)
    return max((float(np.max(np.abs(block))) for block in diff.blocks.values()), default=0.0)


def laplacian(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Apply the Laplace-Beltrami (or Casimir) operator: multiply each block by -lambda."""
    return HarmonicCoefficients(
        manifold=c.manifold,
        omega=c.omega,
        blocks={key: -c.key_eigenvalue(key) * block for key, block in c.blocks.items()},
    )


def parity_parts(c: HarmonicCoefficients) -> Dict[str, HarmonicCoefficients]:
    """Split S2 coefficients into even and odd degrees."""
    if c.manifold != Manifold.S2:
        raise PreconditionError("Parity split is defined for S2 coefficients")
    even = {k: b for k, b in c.blocks.items() if int(k) % 2 == 0}  # type: ignore[arg-type]
    odd = {k: b for k, b in c.blocks.items() if int(k) % 2 == 1}  # type: ignore[arg-type]
    return {
        "even": HarmonicCoefficients(manifold=c.manifold, omega=c.omega, blocks=even),
        "odd": HarmonicCoefficients(manifold=c.manifold, omega=c.omega, blocks=odd),
    }


def delta_projection(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Orthogonal projection of S2xS2 coefficients onto equal-degree pairs (k, k)."""
    if c.manifold != Manifold.S2XS2:
        raise PreconditionError("Delta projection is defined for S2xS2 coefficients")
    kept = {key: block for key, block in c.blocks.items() if key[0] == key[1]}  # type: ignore[index]
    return HarmonicCoefficients(manifold=c.manifold, omega=c.omega, blocks=kept)


def random_coefficients(
    manifold: Manifold,
    omega: float,
    rng: np.random.Generator,
    degrees: Optional[List[int]] = None,
) -> HarmonicCoefficients:
    """Random normal coefficients filling E_omega (optionally only some degrees).

    On S2xS2 only equal-degree pairs are filled, matching the range of the
    SO(3) Radon transform.
    """
    k_max = max_degree_for(omega)
    allowed = set(range(k_max + 1)) if degrees is None else set(degrees)
    blocks: Dict[DegreeKey, np.ndarray] = {}
    shell = HarmonicCoefficients.zeros(manifold, omega)
    for k in sorted(allowed):
        if k > k_max:
            continue
        key: DegreeKey = (k, k) if manifold == Manifold.S2XS2 else k
        if shell.key_eigenvalue(key) > omega + BANDWIDTH_SLACK:
            continue
        blocks[key] = rng.standard_normal(shell.block_shape(key))
    return HarmonicCoefficients(manifold=manifold, omega=omega, blocks=blocks)
