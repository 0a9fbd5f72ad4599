"""Rotation-group primitives: axis rotations and the Z-X-Z Euler convention.

A rotation with Euler angles (alpha, beta, gamma) is the matrix
``Z(gamma) @ X(beta) @ Z(alpha)`` with ``0 <= beta <= pi`` and
``0 <= alpha, gamma < 2*pi``.
"""

from typing import Tuple

import numpy as np
from scipy.spatial.transform import Rotation

_TWO_PI = 2.0 * np.pi
_GIMBAL_EPS = 1e-12


def rot_z(theta: np.ndarray) -> np.ndarray:
    """Rotation(s) about the z-axis, shape ``(..., 3, 3)``."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1.0
    return out


def rot_x(theta: np.ndarray) -> np.ndarray:
    """Rotation(s) about the x-axis, shape ``(..., 3, 3)``."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def rot_y(theta: np.ndarray) -> np.ndarray:
    """Rotation(s) about the y-axis, shape ``(..., 3, 3)``."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 1, 1] = 1.0
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    return out


def euler_to_matrix(alpha: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Build ``Z(gamma) X(beta) Z(alpha)`` for arrays of Euler angles.

    Args:
        alpha: First (innermost) z-rotation angle(s)
        beta: x-rotation angle(s) in [0, pi]
        gamma: Last (outermost) z-rotation angle(s)

    Returns:
        Rotation matrices of shape ``broadcast_shape + (3, 3)``
    """
    return rot_z(gamma) @ rot_x(beta) @ rot_z(alpha)


def matrix_to_euler(matrices: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Invert :func:`euler_to_matrix`.

    At the gimbal poles (``sin(beta) == 0``) alpha is set to zero and the
    whole z-rotation is carried by gamma.

    Args:
        matrices: Array of shape ``(..., 3, 3)``

    Returns:
        Tuple ``(alpha, beta, gamma)`` of arrays with the leading shape
    """
    g = np.asarray(matrices, dtype=float)
    beta = np.arccos(np.clip(g[..., 2, 2], -1.0, 1.0))
    sin_beta = np.sqrt(g[..., 2, 0] ** 2 + g[..., 2, 1] ** 2)
    regular = sin_beta > _GIMBAL_EPS

    alpha = np.where(regular, np.arctan2(g[..., 2, 0], g[..., 2, 1]), 0.0)
    gamma_regular = np.arctan2(g[..., 0, 2], -g[..., 1, 2])
    gamma_pole = np.arctan2(g[..., 1, 0], g[..., 0, 0])
    gamma = np.where(regular, gamma_regular, gamma_pole)

    return np.mod(alpha, _TWO_PI), beta, np.mod(gamma, _TWO_PI)


def haar_density(beta: np.ndarray) -> np.ndarray:
    """Density of the normalized Haar measure in Euler coordinates."""
    return np.sin(beta) / (8.0 * np.pi**2)


def frame_to_pole(pole: np.ndarray) -> np.ndarray:
    """Rotation(s) whose third column is ``pole``, i.e. mapping e_z to ``pole``.

    Args:
        pole: Unit vector(s), shape ``(..., 3)``

    Returns:
        Proper rotation matrices of shape ``(..., 3, 3)``
    """
    pole = np.asarray(pole, dtype=float)
    pole = pole / np.linalg.norm(pole, axis=-1, keepdims=True)
    # pick the coordinate axis least aligned with the pole as helper
    helper = np.zeros_like(pole)
    idx = np.argmin(np.abs(pole), axis=-1)
    np.put_along_axis(helper, idx[..., None], 1.0, axis=-1)
    e1 = np.cross(helper, pole)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(pole, e1)
    return np.stack([e1, e2, pole], axis=-1)


def random_rotation(seed: int) -> np.ndarray:
    """Deterministic Haar-random rotation matrix for ``seed``."""
    return Rotation.random(random_state=np.random.default_rng(seed)).as_matrix()


def quaternions(matrices: np.ndarray) -> np.ndarray:
    """Unit quaternions (scalar last) for an array of rotation matrices."""
    g = np.asarray(matrices, dtype=float).reshape(-1, 3, 3)
    return Rotation.from_matrix(g).as_quat()


def rotation_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geodesic distance ``arccos((trace(a^T b) - 1) / 2)`` with broadcasting."""
    trace = np.einsum("...ji,...ji->...", np.asarray(a), np.asarray(b))
    return np.arccos(np.clip((trace - 1.0) / 2.0, -1.0, 1.0))
