"""Tensor-product quadrature rules on S2, hemispheres, SO(3) and S2xS2.

All weights are normalized so the full manifold has mass 1. Rules are
Gauss-Legendre in the polar cosine and equispaced (trapezoid) in the
periodic angles.
"""

from typing import Tuple

import numpy as np
from numpy.polynomial import legendre

from ..rotations import euler_to_matrix, frame_to_pole


def sphere_product_rule(n_theta: int, n_phi: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Product rule on S2.

    Exact for spherical polynomials of degree ``<= min(2*n_theta - 1, n_phi - 1)``.

    Args:
        n_theta: Gauss-Legendre nodes in cos(theta)
        n_phi: Equispaced azimuth nodes (default ``2 * n_theta``)

    Returns:
        Tuple of points ``(M, 3)`` and weights ``(M,)`` summing to 1
    """
    n_phi = n_phi or 2 * n_theta
    t, w = legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    tt = np.repeat(t, n_phi)
    pp = np.tile(phi, n_theta)
    s = np.sqrt(1.0 - tt * tt)
    points = np.stack([s * np.cos(pp), s * np.sin(pp), tt], axis=1)
    weights = np.repeat(w / 2.0, n_phi) / n_phi
    return points, weights


def hemisphere_rule(pole: np.ndarray, n_t: int, n_phi: int) -> Tuple[np.ndarray, np.ndarray]:
    """Rule for the hemisphere ``{x : x.pole >= 0}`` with the normalized S2 measure.

    The weights sum to 1/2.
    """
    t, w = legendre.leggauss(n_t)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt = np.repeat(t, n_phi)
    pp = np.tile(phi, n_t)
    s = np.sqrt(1.0 - tt * tt)
    local = np.stack([s * np.cos(pp), s * np.sin(pp), tt], axis=1)
    points = local @ frame_to_pole(np.asarray(pole, dtype=float)).T
    weights = np.repeat(w / 2.0, n_phi) / n_phi
    return points, weights


def so3_product_rule(n_beta: int, n_angle: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Product rule on SO(3) in Euler angles.

    Gauss-Legendre in cos(beta) and equispaced alpha, gamma; exact for Wigner
    polynomials of degree ``<= min(2*n_beta - 1, n_angle - 1)``.

    Returns:
        Tuple of rotation matrices ``(M, 3, 3)`` and weights ``(M,)`` summing to 1
    """
    n_angle = n_angle or 2 * n_beta
    t, w = legendre.leggauss(n_beta)
    angles = 2.0 * np.pi * np.arange(n_angle) / n_angle
    beta = np.arccos(t)
    b, a, g = np.meshgrid(beta, angles, angles, indexing="ij")
    weights = np.broadcast_to((w / 2.0)[:, None, None], b.shape) / n_angle**2
    rotations = euler_to_matrix(a.ravel(), b.ravel(), g.ravel())
    return rotations, weights.ravel().copy()


def product_sphere_rule(n_theta: int, n_phi: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Product of two sphere rules on S2xS2; points are ``(M, 6)``."""
    points, weights = sphere_product_rule(n_theta, n_phi)
    m = points.shape[0]
    first = np.repeat(points, m, axis=0)
    second = np.tile(points, (m, 1))
    return np.hstack([first, second]), np.outer(weights, weights).ravel()
