"""Positive-weight cubature and the discrete inversion formulas.

Weights start from Voronoi cell masses and receive the minimum-norm correction
that makes every moment up to the exactness bandwidth exact. Weights pushed
below a floor are pinned there and the correction is re-solved on the
remaining free weights (active set).
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from ..errors import CubatureInfeasibleError, PreconditionError
from ..models import (
    BANDWIDTH_SLACK,
    Cubature,
    DiscreteInversion,
    HarmonicCoefficients,
    Lattice,
    Manifold,
    degree_eigenvalue,
    max_degree_for,
)
from .geometry import product_lattice, voronoi_partition
from .harmonics import DEFAULT_WIGNER_MAX_DEGREE
from .spaces import (
    analyze,
    basis_matrix,
    delta_projection,
    from_vector,
    key_size,
    layout_keys,
    parity_parts,
    required_exactness,
)
from .transforms import funk_radon_inverse, so3_radon_inverse

logger = logging.getLogger(__name__)

DEFAULT_DENSITY_CONSTANT = 3.0
MOMENT_TOL = 1e-10
WEIGHT_FLOOR = 0.05
VANISHING_TOL = 1e-12


def product_bandwidth(omega1: float, omega2: float, manifold: Manifold = Manifold.S2) -> float:
    """Bandwidth guaranteed to contain ``f * g`` for ``f in E_omega1``, ``g in E_omega2``.

    Degrees add under multiplication (Clebsch-Gordan), so the result is
    ``K(K+1)`` with ``K = K1 + K2``. On S2xS2 the same rule applies per factor.
    """
    k = max(max_degree_for(omega1), 0) + max(max_degree_for(omega2), 0)
    return degree_eigenvalue(k)


def _layout_index(manifold: Manifold, k_max: int, column: int) -> Tuple[int, ...]:
    """Index tuple (k, i), (k, i, j) or (k1, k2, i, j) of a layout column."""
    offset = 0
    for key in layout_keys(manifold, k_max):
        size = key_size(manifold, key)
        if column < offset + size:
            local = column - offset
            if manifold == Manifold.S2:
                return (int(key), local + 1)  # type: ignore[arg-type]
            if manifold == Manifold.SO3:
                width = 2 * int(key) + 1  # type: ignore[arg-type]
                return (int(key), local // width + 1, local % width + 1)  # type: ignore[arg-type]
            k1, k2 = key  # type: ignore[misc]
            return (k1, k2, local // (2 * k2 + 1) + 1, local % (2 * k2 + 1) + 1)
        offset += size
    raise PreconditionError(f"Column {column} outside the degree-{k_max} layout")


def _moment_system(
    lattice: Lattice, k_max: int, wigner_max_degree: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Moment matrix ``A[j, nu] = u_j(x_nu)`` and target ``e_0`` (only constants integrate to 1)."""
    matrix = basis_matrix(lattice.manifold, k_max, lattice.points, wigner_max_degree).T
    target = np.zeros(matrix.shape[0])
    target[0] = 1.0
    return matrix, target


def _active_set_weights(matrix: np.ndarray, target: np.ndarray, initial: np.ndarray) -> np.ndarray:
    """Minimum-norm correction of ``initial`` onto ``A w = b`` with a positivity floor."""
    floor = WEIGHT_FLOOR * initial
    pinned = np.zeros(initial.size, dtype=bool)
    weights = initial.copy()
    for _ in range(initial.size):
        free = ~pinned
        if np.count_nonzero(free) < matrix.shape[0]:
            break
        rhs = target - matrix[:, pinned] @ floor[pinned] - matrix[:, free] @ initial[free]
        correction, *_ = np.linalg.lstsq(matrix[:, free], rhs, rcond=None)
        weights = np.where(pinned, floor, 0.0)
        weights[free] = initial[free] + correction
        low = free & (weights < floor)
        if not low.any():
            break
        pinned |= low
        logger.debug(f"Active set: pinned {int(np.count_nonzero(pinned))} weights at the floor")
    return weights


def compute_cubature(
    lattice: Lattice,
    omega_exact: float,
    density_constant: float = DEFAULT_DENSITY_CONSTANT,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> Cubature:
    """Positive weights on ``lattice`` integrating ``E_omega_exact`` exactly.

    On S2xS2 exactness is per factor; lattices built with
    :func:`product_lattice` get a product of factor cubatures.

    Args:
        lattice: Nodes
        omega_exact: Exactness bandwidth
        density_constant: c in the precondition ``rho * sqrt(omega_exact) <= c``

    Returns:
        Certified cubature

    Raises:
        PreconditionError: If the lattice is too sparse for the requested exactness
        CubatureInfeasibleError: If the moments cannot be matched with positive weights
    """
    if omega_exact < 0:
        raise PreconditionError(f"Exactness bandwidth must be non-negative, got {omega_exact}")
    if lattice.manifold == Manifold.S2XS2 and lattice.factors is not None:
        first = compute_cubature(lattice.factors[0], omega_exact, density_constant)
        second = compute_cubature(lattice.factors[1], omega_exact, density_constant)
        return product_cubature(first, second)

    k_max = max_degree_for(omega_exact)
    if lattice.rho * math.sqrt(omega_exact) > density_constant:
        raise PreconditionError(
            f"Lattice too sparse: rho*sqrt(omega) = {lattice.rho * math.sqrt(omega_exact):.4g} "
            f"exceeds {density_constant}"
        )
    matrix, target = _moment_system(lattice, k_max, wigner_max_degree)
    if lattice.size < matrix.shape[0]:
        raise PreconditionError(
            f"{lattice.size} nodes cannot match {matrix.shape[0]} moments; densify the lattice"
        )

    masses = voronoi_partition(lattice).masses
    initial = masses / masses.sum()
    if k_max <= 0:
        weights = initial
    else:
        weights = _active_set_weights(matrix, target, initial)

    moments = matrix @ weights - target
    worst = int(np.argmax(np.abs(moments)))
    residual = float(np.abs(moments[worst]))
    worst_moment = _layout_index(lattice.manifold, max(k_max, 0), worst)
    if residual > MOMENT_TOL or np.any(weights <= 0):
        raise CubatureInfeasibleError(
            f"Cubature infeasible on {lattice.size} nodes for omega={omega_exact}: residual "
            f"{residual:.3g} at moment {worst_moment}, min weight {float(weights.min()):.3g}",
            residual=residual,
            worst_moment=worst_moment,
        )
    logger.info(
        f"Cubature on {lattice.size} nodes exact to omega={omega_exact} (residual {residual:.2e}, "
        f"weights in [{weights.min():.3g}, {weights.max():.3g}])"
    )
    return Cubature(lattice=lattice, weights=weights, omega_exact=omega_exact, residual=residual)


def product_cubature(first: Cubature, second: Cubature) -> Cubature:
    """Tensor product of two S2 cubatures on S2xS2; weights multiply."""
    lattice = product_lattice(first.lattice, second.lattice)
    return Cubature(
        lattice=lattice,
        weights=np.outer(first.weights, second.weights).ravel(),
        omega_exact=min(first.omega_exact, second.omega_exact),
        residual=max(first.residual, second.residual),
    )


def moment_residuals(
    cubature: Cubature,
    extra_degrees: int = 4,
    tol: float = MOMENT_TOL,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> Tuple[float, Optional[Tuple[Tuple[int, ...], float]]]:
    """Moment errors inside and just beyond the exactness bandwidth.

    Returns:
        Tuple of the largest residual over degrees within ``omega_exact`` and
        the first moment beyond it whose error exceeds ``tol`` (None if none
        within ``extra_degrees`` further degrees)
    """
    manifold = cubature.manifold
    k_exact = max(max_degree_for(cubature.omega_exact), 0)
    k_max = k_exact + extra_degrees
    if manifold == Manifold.SO3:
        k_max = min(k_max, wigner_max_degree)
    matrix = basis_matrix(manifold, k_max, cubature.lattice.points, wigner_max_degree).T
    errors = matrix @ cubature.weights
    errors[0] -= 1.0
    inside: List[float] = []
    first_violation = None
    for column, error in enumerate(errors):
        index = _layout_index(manifold, k_max, column)
        degrees = index[:2] if manifold == Manifold.S2XS2 else index[:1]
        if max(degrees) <= k_exact:
            inside.append(abs(float(error)))
        elif first_violation is None and abs(error) > tol:
            first_violation = (index, float(error))
    return max(inside, default=0.0), first_violation


def discrete_fourier(
    samples: np.ndarray,
    cubature: Cubature,
    omega: float,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> HarmonicCoefficients:
    """Fourier coefficients of ``f in E_omega`` from its samples at the cubature nodes.

    Raises:
        PreconditionError: If the cubature is not exact to ``product_bandwidth(omega, omega)``
    """
    return analyze(
        cubature.lattice.points,
        samples,
        cubature.weights,
        omega,
        cubature.manifold,
        cubature.omega_exact,
        wigner_max_degree,
    )


def discrete_invert_funk_radon(samples: np.ndarray, cubature: Cubature, omega: float) -> DiscreteInversion:
    """Recover an even ``f in E_omega`` from samples of ``Rf`` at the cubature nodes.

    Odd content of the data (which the transform cannot produce) is reported
    and discarded.
    """
    if cubature.manifold != Manifold.S2:
        raise PreconditionError("Funk-Radon inversion needs an S2 cubature")
    image = discrete_fourier(samples, cubature, omega)
    parts = parity_parts(image)
    odd_residual = max((float(np.max(np.abs(b))) for b in parts["odd"].blocks.values()), default=0.0)
    largest = max((float(np.max(np.abs(b))) for b in image.blocks.values()), default=0.0)
    vanishing = largest <= VANISHING_TOL
    if vanishing:
        logger.warning("Funk-Radon data vanishes: input lies in the kernel (odd function)")
    if odd_residual > 1e-9:
        logger.warning(f"Funk-Radon data carries odd content {odd_residual:.3g}; discarded")
    return DiscreteInversion(
        coefficients=funk_radon_inverse(parts["even"]),
        odd_residual=odd_residual,
        vanishing_data=vanishing,
    )


def discrete_invert_so3(
    samples: np.ndarray,
    cubature: Cubature,
    omega: float,
) -> HarmonicCoefficients:
    """Recover ``f in E_omega(SO(3))`` from samples of its Radon transform on S2xS2.

    Raises:
        PreconditionError: If the cubature is not on S2xS2 or not exact enough
    """
    if cubature.manifold != Manifold.S2XS2:
        raise PreconditionError("SO(3) Radon inversion needs an S2xS2 cubature")
    needed = required_exactness(Manifold.SO3, omega)
    if cubature.omega_exact + BANDWIDTH_SLACK < needed:
        raise PreconditionError(
            f"Cubature exact to {cubature.omega_exact} but SO(3) inversion on E_{omega} needs "
            f"per-factor exactness {needed}"
        )
    weights = np.asarray(cubature.weights)
    if np.any(weights <= 0):
        raise PreconditionError("Cubature weights must be strictly positive")
    k_max = max_degree_for(omega)
    basis = basis_matrix(Manifold.S2XS2, k_max, cubature.lattice.points)
    vector = basis.T @ (weights * np.asarray(samples, dtype=float))
    image = from_vector(Manifold.S2XS2, vector, k_max, 2.0 * degree_eigenvalue(k_max))
    return so3_radon_inverse(delta_projection(image))
