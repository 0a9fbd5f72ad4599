"""Funk-Radon, hemispherical and SO(3) Radon transforms as spectral multipliers.

Every transform acts diagonally on harmonic degrees. The analytic multiplier
formulas fix the ratios between degrees; the absolute constant is pinned by
direct quadrature of a low-degree function (the geometric oracles below), so
the tables match the normalized measures used throughout:

* Funk-Radon: mean over the great circle orthogonal to the pole.
* Hemispherical: integral over ``{x : x.pole >= 0}`` with the normalized S2 measure.
* SO(3) Radon: mean of ``f`` over the circle ``{g : g x = y}``.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Dict

import numpy as np
from scipy import special

from ..errors import PreconditionError
from ..models import (
    DegreeKey,
    GreatCircle,
    HarmonicCoefficients,
    Manifold,
    MultiplierTable,
    TransformKind,
)
from ..rotations import frame_to_pole, rot_z
from .harmonics import sph_harmonic_blocks
from .quadrature import hemisphere_rule

logger = logging.getLogger(__name__)

PARITY_TOL = 1e-12
MIN_CIRCLE_NODES = 8

SphereFunction = Callable[[np.ndarray], np.ndarray]


def _raw_funk(k_max: int, n: int) -> np.ndarray:
    """r_k = (-1)^{k/2} Gamma((k+1)/2) / Gamma((k+n)/2) for even k, zero for odd k."""
    values = np.zeros(k_max + 1)
    for k in range(0, k_max + 1, 2):
        sign = -1.0 if (k // 2) % 2 else 1.0
        values[k] = sign * math.exp(special.gammaln((k + 1) / 2.0) - special.gammaln((k + n) / 2.0))
    return values


def _raw_hemispherical(k_max: int, n: int) -> np.ndarray:
    """m_k = (-1)^{(k-1)/2} Gamma(k/2) / Gamma((k+n+1)/2) for odd k, zero for even k."""
    values = np.zeros(k_max + 1)
    for k in range(1, k_max + 1, 2):
        sign = -1.0 if ((k - 1) // 2) % 2 else 1.0
        values[k] = sign * math.exp(special.gammaln(k / 2.0) - special.gammaln((k + n + 1) / 2.0))
    return values


def multiplier_table(transform: TransformKind, k_max: int, n: int = 2) -> MultiplierTable:
    """Analytic multiplier table for any sphere dimension ``n >= 2``.

    For ``n == 2`` the table is calibrated against the geometric oracles;
    otherwise the raw analytic values are returned uncalibrated.

    Raises:
        PreconditionError: If ``k_max < 0`` or ``n < 2``
    """
    if k_max < 0 or n < 2:
        raise PreconditionError(f"Need k_max >= 0 and n >= 2, got k_max={k_max}, n={n}")
    if n == 2:
        return _calibrated_table(transform, k_max)
    if transform == TransformKind.FUNK_RADON:
        values = _raw_funk(k_max, n)
    elif transform == TransformKind.HEMISPHERICAL:
        values = _raw_hemispherical(k_max, n)
    else:
        raise PreconditionError("The SO(3) Radon transform has no sphere-dimension parameter")
    return MultiplierTable(transform=transform, n=n, values=values, calibrated=False)


@lru_cache(maxsize=32)
def _calibrated_table(transform: TransformKind, k_max: int) -> MultiplierTable:
    degrees = np.arange(k_max + 1)
    if transform == TransformKind.FUNK_RADON:
        raw = _raw_funk(k_max, 2)
        mean_of_one = funk_radon_geometric(_constant, GreatCircle(np.array([0.0, 0.0, 1.0])), 16)
        values = raw * (mean_of_one / raw[0])
    elif transform == TransformKind.HEMISPHERICAL:
        raw = _raw_hemispherical(max(k_max, 1), 2)
        pole = np.array([0.0, 0.0, 1.0])
        # Y_1 with m = 0 is sqrt(3) z; its value at the pole is sqrt(3)
        degree_one = hemispherical_geometric(lambda p: np.sqrt(3.0) * p[:, 2], pole, 8) / np.sqrt(3.0)
        values = (raw * (degree_one / raw[1]))[: k_max + 1]
        values[0] = hemispherical_geometric(_constant, pole, 8)
    else:
        identity = np.eye(3)
        mean_of_one = so3_radon_geometric(_constant, identity[2], identity[2], 16)
        values = mean_of_one / (2.0 * degrees + 1.0)
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    logger.debug(f"Calibrated {transform.value} multipliers up to degree {k_max}")
    return MultiplierTable(transform=transform, n=2, values=values, calibrated=True)


def _constant(points: np.ndarray) -> np.ndarray:
    return np.ones(np.asarray(points).shape[0])


def _require(c: HarmonicCoefficients, manifold: Manifold, operation: str) -> None:
    if c.manifold != manifold:
        raise PreconditionError(f"{operation} needs {manifold.value} coefficients, got {c.manifold.value}")


def _scale_blocks(c: HarmonicCoefficients, table: MultiplierTable) -> Dict[DegreeKey, np.ndarray]:
    return {
        key: table[int(key)] * block  # type: ignore[arg-type]
        for key, block in c.blocks.items()
        if table[int(key)] != 0.0  # type: ignore[arg-type]
    }


def _check_parity(c: HarmonicCoefficients, keep_odd: bool, tol: float, operation: str) -> None:
    for key, block in c.blocks.items():
        k = int(key)  # type: ignore[arg-type]
        if (k % 2 == 1) != keep_odd and np.max(np.abs(block)) > tol:
            kind = "even" if keep_odd else "odd"
            raise PreconditionError(
                f"{operation} needs {'odd' if keep_odd else 'even'} input; degree {k} carries {kind} "
                f"content {np.max(np.abs(block)):.3g}"
            )


def _divide_blocks(c: HarmonicCoefficients, table: MultiplierTable, keep_odd: bool) -> Dict[DegreeKey, np.ndarray]:
    return {
        key: block / table[int(key)]  # type: ignore[arg-type]
        for key, block in c.blocks.items()
        if (int(key) % 2 == 1) == keep_odd  # type: ignore[arg-type]
    }


def funk_radon_forward(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Funk-Radon transform: odd degrees vanish, even degrees scale by P_k(0)."""
    _require(c, Manifold.S2, "Funk-Radon transform")
    table = multiplier_table(TransformKind.FUNK_RADON, max(c.max_degree, 0))
    return HarmonicCoefficients(manifold=Manifold.S2, omega=c.omega, blocks=_scale_blocks(c, table))


def funk_radon_inverse(c: HarmonicCoefficients, tol: float = PARITY_TOL) -> HarmonicCoefficients:
    """Inverse Funk-Radon transform on even functions.

    Raises:
        PreconditionError: If any odd degree carries content above ``tol``
    """
    _require(c, Manifold.S2, "Funk-Radon inversion")
    _check_parity(c, keep_odd=False, tol=tol, operation="Funk-Radon inversion")
    table = multiplier_table(TransformKind.FUNK_RADON, max(c.max_degree, 0))
    return HarmonicCoefficients(
        manifold=Manifold.S2, omega=c.omega, blocks=_divide_blocks(c, table, keep_odd=False)
    )


def funk_radon_geometric(f: SphereFunction, circle: GreatCircle, q: int = 64) -> float:
    """Mean of ``f`` over ``circle`` by the ``q``-point trapezoid rule.

    Raises:
        PreconditionError: If fewer than 8 nodes are requested
    """
    if q < MIN_CIRCLE_NODES:
        raise PreconditionError(f"Need at least {MIN_CIRCLE_NODES} circle nodes, got {q}")
    phi = 2.0 * np.pi * np.arange(q) / q
    return float(np.mean(f(circle.points(phi))))


def hemispherical_forward(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Hemispherical transform: even degrees above zero vanish."""
    _require(c, Manifold.S2, "Hemispherical transform")
    table = multiplier_table(TransformKind.HEMISPHERICAL, max(c.max_degree, 0))
    return HarmonicCoefficients(manifold=Manifold.S2, omega=c.omega, blocks=_scale_blocks(c, table))


def hemispherical_inverse(c: HarmonicCoefficients, tol: float = PARITY_TOL) -> HarmonicCoefficients:
    """Inverse hemispherical transform on odd functions.

    Degree zero counts as even content and is rejected.

    Raises:
        PreconditionError: If any even degree carries content above ``tol``
    """
    _require(c, Manifold.S2, "Hemispherical inversion")
    _check_parity(c, keep_odd=True, tol=tol, operation="Hemispherical inversion")
    table = multiplier_table(TransformKind.HEMISPHERICAL, max(c.max_degree, 1))
    return HarmonicCoefficients(
        manifold=Manifold.S2, omega=c.omega, blocks=_divide_blocks(c, table, keep_odd=True)
    )


def hemispherical_geometric(f: SphereFunction, pole: np.ndarray, nodes: int = 32) -> float:
    """Integral of ``f`` over the hemisphere around ``pole`` (normalized measure).

    Uses ``nodes`` Gauss-Legendre nodes in height and ``2 * nodes`` azimuths.
    """
    if nodes < 2:
        raise PreconditionError(f"Need at least 2 hemisphere nodes, got {nodes}")
    points, weights = hemisphere_rule(np.asarray(pole, dtype=float), nodes, 2 * nodes)
    return float(weights @ f(points))


def so3_radon_forward(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """SO(3) Radon transform: T_k^{ij} maps to kappa_k Y_k^i(x) Y_k^j(y).

    The output lives on the equal-degree blocks ``(k, k)``; its bandwidth is
    ``2 * c.omega`` because the S2xS2 eigenvalue of ``(k, k)`` is ``2k(k+1)``.
    """
    _require(c, Manifold.SO3, "SO(3) Radon transform")
    table = multiplier_table(TransformKind.SO3_RADON, max(c.max_degree, 0))
    blocks = {(int(k), int(k)): table[int(k)] * block for k, block in c.blocks.items()}  # type: ignore[arg-type]
    return HarmonicCoefficients(manifold=Manifold.S2XS2, omega=2.0 * c.omega, blocks=blocks)


def so3_radon_inverse(c: HarmonicCoefficients, tol: float = PARITY_TOL) -> HarmonicCoefficients:
    """Inverse SO(3) Radon transform on the equal-degree subspace.

    Raises:
        PreconditionError: If a block ``(k1, k2)`` with ``k1 != k2`` is above ``tol``
    """
    _require(c, Manifold.S2XS2, "SO(3) Radon inversion")
    for (k1, k2), block in c.blocks.items():  # type: ignore[misc]
        if k1 != k2 and np.max(np.abs(block)) > tol:
            raise PreconditionError(
                f"SO(3) Radon inversion needs equal-degree input; pair ({k1}, {k2}) carries "
                f"{np.max(np.abs(block)):.3g}"
            )
    table = multiplier_table(TransformKind.SO3_RADON, max(c.max_degree, 0))
    blocks = {
        key[0]: block / table[key[0]]  # type: ignore[index]
        for key, block in c.blocks.items()
        if key[0] == key[1]  # type: ignore[index]
    }
    return HarmonicCoefficients(manifold=Manifold.SO3, omega=c.omega / 2.0, blocks=blocks)


def so3_circle(x: np.ndarray, y: np.ndarray, q: int) -> np.ndarray:
    """``q`` equispaced rotations on ``{g : g x = y}``, shape ``(q, 3, 3)``."""
    x_frame = frame_to_pole(np.asarray(x, dtype=float))
    y_frame = frame_to_pole(np.asarray(y, dtype=float))
    phi = 2.0 * np.pi * np.arange(q) / q
    return y_frame @ rot_z(phi) @ x_frame.T


def so3_radon_geometric(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, y: np.ndarray, q: int = 64) -> float:
    """Mean of ``f`` over the rotations taking ``x`` to ``y`` (trapezoid rule)."""
    if q < MIN_CIRCLE_NODES:
        raise PreconditionError(f"Need at least {MIN_CIRCLE_NODES} circle nodes, got {q}")
    return float(np.mean(f(so3_circle(x, y, q))))


def xray_crystallographic(c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Crystallographic X-ray transform ``(Rf(x, y) + Rf(-x, y)) / 2``.

    Y_k(-x) = (-1)^k Y_k(x), so only even degrees survive.
    """
    forward = so3_radon_forward(c)
    blocks = {key: block for key, block in forward.blocks.items() if key[0] % 2 == 0}  # type: ignore[index]
    return HarmonicCoefficients(manifold=Manifold.S2XS2, omega=forward.omega, blocks=blocks)


def conditioning(transform: TransformKind, k_max: int) -> float:
    """Largest ratio ``|mu_ref / mu_k|`` over invertible degrees ``k <= k_max``.

    The reference degree is the lowest invertible one: 0 for Funk-Radon and
    SO(3) Radon, 1 for the hemispherical transform.
    """
    table = multiplier_table(transform, max(k_max, 1))
    values = table.values[: k_max + 1]
    start = 1 if transform == TransformKind.HEMISPHERICAL else 0
    admissible = [k for k in range(start, k_max + 1) if values[k] != 0.0]
    if not admissible:
        return 1.0
    reference = abs(values[admissible[0]])
    return max(reference / abs(values[k]) for k in admissible)


def transform_pointwise(kind: TransformKind, c: HarmonicCoefficients, poles: np.ndarray) -> np.ndarray:
    """Values of the forward transform of ``c`` at sphere points (S2 transforms only)."""
    if kind == TransformKind.FUNK_RADON:
        image = funk_radon_forward(c)
    elif kind == TransformKind.HEMISPHERICAL:
        image = hemispherical_forward(c)
    else:
        raise PreconditionError("Pointwise sphere evaluation applies to S2 transforms")
    values = np.zeros(np.asarray(poles).reshape(-1, 3).shape[0])
    for k, block in sph_harmonic_blocks(max(image.max_degree, 0), poles):
        if k in image.blocks:
            values += block @ image.blocks[k]
    return values


def forward(kind: TransformKind, c: HarmonicCoefficients) -> HarmonicCoefficients:
    """Dispatch a forward transform by tag."""
    return {
        TransformKind.FUNK_RADON: funk_radon_forward,
        TransformKind.HEMISPHERICAL: hemispherical_forward,
        TransformKind.SO3_RADON: so3_radon_forward,
    }[kind](c)


def inverse(kind: TransformKind, c: HarmonicCoefficients, tol: float = PARITY_TOL) -> HarmonicCoefficients:
    """Dispatch an inverse transform by tag."""
    return {
        TransformKind.FUNK_RADON: funk_radon_inverse,
        TransformKind.HEMISPHERICAL: hemispherical_inverse,
        TransformKind.SO3_RADON: so3_radon_inverse,
    }[kind](c, tol)
