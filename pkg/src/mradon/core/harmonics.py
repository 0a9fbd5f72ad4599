"""Orthonormal eigenbases on S2 and SO(3).

Conventions (normalized measures, total mass 1 on S2 and on SO(3)):

* Real spherical harmonics ``Y_k^i`` with ``i = 1..2k+1`` and signed order
  ``m = i - k - 1``. For ``m > 0`` the function is ``sqrt(2) Pbar_k^m cos(m phi)``,
  for ``m < 0`` it is ``sqrt(2) Pbar_k^{|m|} sin(|m| phi)`` and for ``m = 0`` it is
  ``Pbar_k^0``, where ``Pbar_k^m = sqrt((2k+1)(k-m)!/(k+m)!) P_k^m`` carries no
  Condon-Shortley phase. ``Y_0^1 = 1``.
* Addition theorem: ``sum_i Y_k^i(x) Y_k^i(y) = (2k+1) P_k(x.y)``.
* Wigner polynomials ``T_k^{ij}(g) = int Y_k^i(z) Y_k^j(g z) dz`` so that
  ``Y_k^j(g z) = sum_i T_k^{ij}(g) Y_k^i(z)`` and ``T_k(g1 g2) = T_k(g2) T_k(g1)``.
"""

import logging
import math
from functools import lru_cache
from typing import Iterator, Tuple, Union

import numpy as np
from numpy.polynomial import legendre
from scipy import special

from ..errors import PreconditionError
from ..models import HarmonicIndex, RotationPoint, SpherePoint
from ..rotations import matrix_to_euler, rot_y

logger = logging.getLogger(__name__)

DEFAULT_WIGNER_MAX_DEGREE = 128

PointsLike = Union[SpherePoint, np.ndarray]


def as_unit_vectors(points: PointsLike) -> np.ndarray:
    """Coerce a point or an array of points to an ``(N, 3)`` array of unit vectors."""
    if isinstance(points, SpherePoint):
        return points.as_array()[None, :]
    array = np.asarray(points, dtype=float)
    if array.ndim == 1:
        array = array[None, :]
    if array.shape[-1] != 3:
        raise PreconditionError(f"Sphere points need 3 coordinates, got shape {array.shape}")
    norms = np.linalg.norm(array, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise PreconditionError("Sphere points must be unit vectors")
    return array


def _legendre_rows(k_max: int, cos_theta: np.ndarray, sin_theta: np.ndarray
                   ) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(k, rows)`` with ``rows[m] = Pbar_k^m`` for ``m = 0..k``.

    Degree-outer three-term recurrence; only two previous degrees are kept.
    """
    x, s = cos_theta, sin_theta
    prev2 = np.empty((0, x.size))
    prev = np.ones((1, x.size))
    yield 0, prev
    for k in range(1, k_max + 1):
        cur = np.empty((k + 1, x.size))
        if k >= 2:
            m = np.arange(k - 1, dtype=float)
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            cur[: k - 1] = a[:, None] * (x * prev[: k - 1] - b[:, None] * prev2[: k - 1])
        cur[k - 1] = np.sqrt(2.0 * k + 1.0) * x * prev[k - 1]
        cur[k] = np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s * prev[k - 1]
        yield k, cur
        prev2, prev = prev, cur


def sph_harmonic_blocks(k_max: int, points: PointsLike) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(k, Y)`` with ``Y[n, i-1] = Y_k^i(points[n])`` for ``k = 0..k_max``.

    Args:
        k_max: Highest degree
        points: Unit vectors, shape ``(N, 3)``

    Yields:
        Degree and an ``(N, 2k+1)`` block of harmonic values
    """
    xyz = as_unit_vectors(points)
    cos_theta = np.clip(xyz[:, 2], -1.0, 1.0)
    sin_theta = np.hypot(xyz[:, 0], xyz[:, 1])
    phi = np.arctan2(xyz[:, 1], xyz[:, 0])
    orders = np.arange(k_max + 1, dtype=float)
    cos_m = np.cos(np.outer(orders, phi))
    sin_m = np.sin(np.outer(orders, phi))
    root2 = np.sqrt(2.0)

    for k, rows in _legendre_rows(k_max, cos_theta, sin_theta):
        block = np.empty((xyz.shape[0], 2 * k + 1))
        block[:, k] = rows[0]
        if k > 0:
            m = np.arange(1, k + 1)
            block[:, k + m] = (root2 * rows[m] * cos_m[m]).T
            block[:, k - m] = (root2 * rows[m] * sin_m[m]).T
        yield k, block


def sph_harmonic_matrix(k_max: int, points: PointsLike) -> np.ndarray:
    """Matrix of all harmonics up to ``k_max``; column ``k^2 + i - 1`` holds ``Y_k^i``."""
    if k_max < 0:
        return np.zeros((as_unit_vectors(points).shape[0], 0))
    return np.concatenate([block for _, block in sph_harmonic_blocks(k_max, points)], axis=1)


def eval_sph_harmonic(idx: HarmonicIndex, p: PointsLike) -> Union[float, np.ndarray]:
    """Evaluate ``Y_k^i`` at one point (float) or at an array of points.

    Args:
        idx: Harmonic index (k, i)
        p: A SpherePoint or unit vectors of shape ``(N, 3)``

    Returns:
        Value(s) of the real spherical harmonic

    Raises:
        PreconditionError: If the index carries a second order index
    """
    if idx.j is not None:
        raise PreconditionError("Spherical harmonics take a single order index")
    block = None
    for _, block in sph_harmonic_blocks(idx.k, p):
        pass
    values = block[:, idx.i - 1]  # type: ignore[index]
    if isinstance(p, SpherePoint):
        return float(values[0])
    return values


def _z_rotation_blocks(k: int, theta: np.ndarray) -> np.ndarray:
    """Representation matrices of z-rotations on degree k, shape ``(N, 2k+1, 2k+1)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.zeros((theta.size, 2 * k + 1, 2 * k + 1))
    out[:, k, k] = 1.0
    for m in range(1, k + 1):
        c, s = np.cos(m * theta), np.sin(m * theta)
        plus, minus = k + m, k - m
        out[:, plus, plus] = c
        out[:, minus, plus] = -s
        out[:, plus, minus] = s
        out[:, minus, minus] = c
    return out


@lru_cache(maxsize=None)
def _half_pi_matrix(k: int) -> np.ndarray:
    """Representation matrix of the rotation R_y(pi/2) on degree k.

    Computed once per degree with a product rule exact for polynomials of
    degree 2k on the sphere.
    """
    nodes, gauss_weights = legendre.leggauss(k + 1)
    n_phi = 2 * k + 2
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    t = np.repeat(nodes, n_phi)
    s = np.sqrt(1.0 - t * t)
    ph = np.tile(phi, k + 1)
    z = np.stack([s * np.cos(ph), s * np.sin(ph), t], axis=1)
    weights = np.repeat(gauss_weights / 2.0, n_phi) / n_phi

    rotated = z @ rot_y(np.pi / 2).T
    *_, original_block = (block for _, block in sph_harmonic_blocks(k, z))
    *_, rotated_block = (block for _, block in sph_harmonic_blocks(k, rotated))
    matrix = original_block.T @ (weights[:, None] * rotated_block)
    matrix.setflags(write=False)
    logger.debug(f"Cached half-pi rotation matrix for degree {k}")
    return matrix


def _check_wigner_degree(k: int, max_degree: int) -> None:
    if k < 0:
        raise PreconditionError(f"Degree must be non-negative, got k={k}")
    if k > max_degree:
        raise PreconditionError(
            f"Wigner degree {k} exceeds the configured cap {max_degree}"
        )


def wigner_matrices(
    k: int,
    rotations: np.ndarray,
    max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> np.ndarray:
    """Matrices ``T_k(g)`` for a batch of rotations.

    Uses ``g = Z(gamma) X(beta) Z(alpha)`` and ``X(beta) = R_y(pi/2) Z(beta) R_y(-pi/2)``,
    so ``T_k(g) = Z_k(alpha) J^T Z_k(beta) J Z_k(gamma)`` with ``J = T_k(R_y(pi/2))``.

    Args:
        k: Degree
        rotations: Rotation matrices of shape ``(N, 3, 3)`` or ``(3, 3)``
        max_degree: Degree cap

    Returns:
        Array of shape ``(N, 2k+1, 2k+1)``; entry ``[n, i-1, j-1]`` is ``T_k^{ij}(g_n)``
    """
    _check_wigner_degree(k, max_degree)
    g = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    if k == 0:
        return np.ones((g.shape[0], 1, 1))
    alpha, beta, gamma = matrix_to_euler(g)
    half_pi = _half_pi_matrix(k)
    return (
        _z_rotation_blocks(k, alpha)
        @ half_pi.T
        @ _z_rotation_blocks(k, beta)
        @ half_pi
        @ _z_rotation_blocks(k, gamma)
    )


def eval_wigner(
    idx: HarmonicIndex,
    g: Union[RotationPoint, np.ndarray],
    max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> Union[float, np.ndarray]:
    """Evaluate ``T_k^{ij}`` at one rotation (float) or a batch of rotation matrices.

    Raises:
        PreconditionError: If the index has no second order index or k exceeds the cap
    """
    if idx.j is None:
        raise PreconditionError("Wigner polynomials need the index pair (i, j)")
    matrices = g.matrix() if isinstance(g, RotationPoint) else g
    values = wigner_matrices(idx.k, matrices, max_degree)[:, idx.i - 1, idx.j - 1]
    if isinstance(g, RotationPoint):
        return float(values[0])
    return values


def gegenbauer_half(k: int, u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Gegenbauer polynomial ``C_k^{1/2}(u) = P_k(u)``.

    Under the normalized-measure convention used here the addition identity
    reads ``C_k^{1/2}(x.y) = (1/(2k+1)) sum_i Y_k^i(x) Y_k^i(y)``.

    Raises:
        PreconditionError: If k < 0 or |u| > 1 + 1e-12
    """
    if k < 0:
        raise PreconditionError(f"Degree must be non-negative, got k={k}")
    values = np.asarray(u, dtype=float)
    if np.any(np.abs(values) > 1.0 + 1e-12):
        raise PreconditionError("Gegenbauer argument outside [-1, 1]")
    result = special.eval_legendre(k, np.clip(values, -1.0, 1.0))
    if np.ndim(u) == 0:
        return float(result)
    return result


def zonal_series(coefficients: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_k coefficients[k] P_k(u)`` by Clenshaw recursion."""
    return legendre.legval(np.clip(u, -1.0, 1.0), coefficients)


def zonal_series_2d(coefficients: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_{k1,k2} coefficients[k1, k2] P_k1(u) P_k2(v)``."""
    return legendre.legval2d(np.clip(u, -1.0, 1.0), np.clip(v, -1.0, 1.0), coefficients)


def dim_harmonic_space(n: int, k: int) -> int:
    """Dimension ``(n+2k-1)(n+k-2)!/(k!(n-1)!)`` of degree-k harmonics on S^n.

    Python integers are unbounded, so the count is exact for any size.

    Raises:
        PreconditionError: If n < 2 or k < 0
    """
    if n < 2 or k < 0:
        raise PreconditionError(f"Need n >= 2 and k >= 0, got n={n}, k={k}")
    numerator = (n + 2 * k - 1) * math.factorial(n + k - 2)
    denominator = math.factorial(k) * math.factorial(n - 1)
    return numerator // denominator
