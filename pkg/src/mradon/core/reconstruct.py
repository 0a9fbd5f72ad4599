"""Iterative reconstruction of bandlimited functions from point samples.

Two schemes share one driver:

* the Voronoi iteration ``f_{m+1} = f_m + P_omega V (f - f_m)`` where ``V``
  spreads each sample over its Voronoi cell;
* the relaxed frame algorithm ``f_m = f_{m-1} + gamma S (f - f_{m-1})`` with
  ``S`` the sampling frame operator scaled by ``rho^n``.

All work happens on coefficient vectors of the orthonormal layout basis, so
vector norms are L2 norms.
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import sparse

from ..errors import PreconditionError, RankDeficientSamplingError, ReconstructionDivergedError
from ..models import (
    BANDWIDTH_SLACK,
    HarmonicCoefficients,
    IterationTrace,
    Lattice,
    VoronoiPartition,
    max_degree_for,
)
from .geometry import voronoi_partition
from .harmonics import DEFAULT_WIGNER_MAX_DEGREE
from .parallel import assemble_rows
from .spaces import basis_matrix, from_vector, layout_dimension, layout_eigenvalues, to_vector

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_STEPS = 200
NON_CONTRACTING_STEPS = 3
CONTRACTION_SLACK = 1e-9
RANK_TOL = 1e-12

StepFunction = Callable[[np.ndarray], np.ndarray]


class _Space:
    """Columns of the layout spanning E_omega on a lattice's manifold."""

    def __init__(self, lattice: Lattice, omega: float, wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE):
        self.lattice = lattice
        self.omega = omega
        self.k_max = max(max_degree_for(omega), 0)
        self.wigner_max_degree = wigner_max_degree
        self.columns = np.flatnonzero(layout_eigenvalues(lattice.manifold, self.k_max) <= omega + BANDWIDTH_SLACK)

    @property
    def dimension(self) -> int:
        return int(self.columns.size)

    def basis(self, points: np.ndarray, threads: int = 1) -> np.ndarray:
        full = layout_dimension(self.lattice.manifold, self.k_max)
        matrix = assemble_rows(
            points.shape[0],
            full,
            lambda rows: basis_matrix(self.lattice.manifold, self.k_max, points[rows], self.wigner_max_degree),
            threads,
            chunk=4096,
        )
        return matrix[:, self.columns]

    def coefficients(self, vector: np.ndarray) -> HarmonicCoefficients:
        full = np.zeros(layout_dimension(self.lattice.manifold, self.k_max))
        full[self.columns] = vector
        return from_vector(self.lattice.manifold, full, self.k_max, self.omega)

    def vector(self, c: HarmonicCoefficients) -> np.ndarray:
        return to_vector(c, self.k_max)[self.columns]


def _check_samples(samples: np.ndarray, lattice: Lattice) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (lattice.size,):
        raise PreconditionError(f"{samples.shape} samples for a lattice of {lattice.size} points")
    return samples


def _voronoi_matrix(space: _Space, partition: Optional[VoronoiPartition], threads: int) -> np.ndarray:
    """``Theta[nu, i] = integral of u_i over the Voronoi cell of x_nu``."""
    partition = partition or voronoi_partition(space.lattice)
    grid_basis = space.basis(partition.grid_points, threads)
    n_grid = partition.grid_points.shape[0]
    cells = sparse.csr_matrix(
        (partition.grid_weights, (partition.owners, np.arange(n_grid))),
        shape=(space.lattice.size, n_grid),
    )
    return np.asarray(cells @ grid_basis)


def voronoi_approximation(
    samples: np.ndarray,
    lattice: Lattice,
    omega: float,
    partition: Optional[VoronoiPartition] = None,
    threads: int = 1,
) -> HarmonicCoefficients:
    """``P_omega V f``: project the Voronoi step function of the samples onto ``E_omega``.

    Args:
        samples: f at the lattice points
        lattice: Sampling lattice
        omega: Target bandwidth
        partition: Precomputed Voronoi partition of ``lattice``

    Returns:
        Coefficients of the approximation; linear in the samples
    """
    samples = _check_samples(samples, lattice)
    space = _Space(lattice, omega)
    theta = _voronoi_matrix(space, partition, threads)
    return space.coefficients(theta.T @ samples)


def _geometric_mean_ratio(values: List[float], burn_in: int = 3) -> float:
    ratios = [b / a for a, b in zip(values, values[1:]) if a > 0 and b > 0]
    if len(ratios) > burn_in:
        ratios = ratios[burn_in:]
    if not ratios:
        return 0.0
    return float(math.exp(np.mean(np.log(ratios))))


def _iterate(
    method: str,
    step: StepFunction,
    dimension: int,
    tol: float,
    max_steps: int,
    truth: Optional[np.ndarray],
    contraction: Optional[float] = None,
) -> Tuple[np.ndarray, IterationTrace]:
    """Run ``v += step(v)`` from zero until the tracked error drops below ``tol``.

    The tracked error is the distance to ``truth`` when given and the update
    norm otherwise. Three consecutive non-contracting steps abort the run.
    """
    vector = np.zeros(dimension)
    errors: List[float] = []
    updates: List[float] = []
    non_contracting = 0
    converged = False

    def _trace() -> IterationTrace:
        estimate = contraction if contraction is not None else _geometric_mean_ratio(errors)
        return IterationTrace(
            method=method,
            errors=tuple(errors),
            update_norms=tuple(updates),
            contraction=estimate,
            steps=len(errors),
            converged=converged,
        )

    for _ in range(max_steps):
        update = step(vector)
        vector = vector + update
        updates.append(float(np.linalg.norm(update)))
        errors.append(float(np.linalg.norm(truth - vector)) if truth is not None else updates[-1])
        if errors[-1] <= tol:
            converged = True
            break
        if len(errors) >= 2 and errors[-1] >= (1.0 - CONTRACTION_SLACK) * errors[-2]:
            non_contracting += 1
        else:
            non_contracting = 0
        if non_contracting >= NON_CONTRACTING_STEPS or not np.isfinite(errors[-1]):
            trace = _trace()
            raise ReconstructionDivergedError(
                f"{method} iteration stopped contracting after {len(errors)} steps "
                f"(error {errors[-1]:.3g})",
                trace=trace,
            )
    trace = _trace()
    if converged:
        logger.info(f"{method} iteration converged in {trace.steps} steps (contraction {trace.contraction:.3g})")
    else:
        logger.warning(f"{method} iteration reached {max_steps} steps with error {errors[-1]:.3g}")
    return vector, trace


def iterative_reconstruct(
    samples: np.ndarray,
    lattice: Lattice,
    omega: float,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    truth: Optional[HarmonicCoefficients] = None,
    partition: Optional[VoronoiPartition] = None,
    threads: int = 1,
) -> Tuple[HarmonicCoefficients, IterationTrace]:
    """Recover ``f in E_omega`` from its samples by the Voronoi iteration.

    Each step samples the current iterate at the lattice, spreads the
    residual over the Voronoi cells and projects back onto ``E_omega``.

    Args:
        samples: f at the lattice points
        lattice: Sampling lattice
        omega: Bandwidth of f
        tol: Stopping threshold on the error (or on the update norm without ``truth``)
        max_steps: Step limit
        truth: Known f, used only to record true errors

    Raises:
        ReconstructionDivergedError: If the iteration stops contracting
    """
    samples = _check_samples(samples, lattice)
    space = _Space(lattice, omega)
    theta = _voronoi_matrix(space, partition, threads)
    at_lattice = space.basis(lattice.points, threads)
    target = space.vector(truth) if truth is not None else None

    def _step(vector: np.ndarray) -> np.ndarray:
        return theta.T @ (samples - at_lattice @ vector)

    vector, trace = _iterate("voronoi", _step, space.dimension, tol, max_steps, target)
    return space.coefficients(vector), trace


def pp_frame_bounds(lattice: Lattice, omega: float, threads: int = 1) -> Tuple[float, float]:
    """Extreme eigenvalues ``(A, B)`` of ``rho^n sum_nu u_i(x_nu) u_j(x_nu)`` on ``E_omega``.

    Raises:
        RankDeficientSamplingError: If ``A <= 1e-12``
    """
    space = _Space(lattice, omega)
    at_lattice = space.basis(lattice.points, threads)
    gram = lattice.rho ** lattice.manifold.dimension * (at_lattice.T @ at_lattice)
    eigenvalues = np.linalg.eigvalsh(gram)
    lower, upper = float(eigenvalues[0]), float(eigenvalues[-1])
    if lower <= RANK_TOL:
        raise RankDeficientSamplingError(
            f"Sampling on {lattice.size} points is rank-deficient on E_{omega} "
            f"(dimension {space.dimension}, lower bound {lower:.3g})",
            lower_bound=lower,
        )
    logger.debug(f"Frame bounds on E_{omega}: A={lower:.6g}, B={upper:.6g}")
    return lower, upper


def frame_algorithm(
    projections: np.ndarray,
    lattice: Lattice,
    omega: float,
    gamma: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    truth: Optional[HarmonicCoefficients] = None,
    threads: int = 1,
) -> Tuple[HarmonicCoefficients, IterationTrace]:
    """Recover f from ``<f, psi_nu>`` with the relaxed frame iteration.

    ``psi_nu`` is the projection of the Dirac mass at ``x_nu`` onto
    ``E_omega``, so for ``f in E_omega`` the projections are the samples.
    The recorded contraction is ``eta = (B - A)/(A + B)`` for the default
    relaxation and ``max |1 - gamma lambda|`` otherwise.

    Raises:
        PreconditionError: If gamma lies outside ``(0, 2/B)``
        RankDeficientSamplingError: If the sampling does not define a frame
        ReconstructionDivergedError: If the iteration stops contracting
    """
    projections = _check_samples(projections, lattice)
    lower, upper = pp_frame_bounds(lattice, omega, threads)
    gamma = 2.0 / (lower + upper) if gamma is None else gamma
    if not 0.0 < gamma < 2.0 / upper:
        raise PreconditionError(f"Relaxation {gamma} outside (0, {2.0 / upper:.6g})")
    eta = max(abs(1.0 - gamma * lower), abs(1.0 - gamma * upper))

    space = _Space(lattice, omega)
    at_lattice = space.basis(lattice.points, threads)
    scale = lattice.rho ** lattice.manifold.dimension
    target = space.vector(truth) if truth is not None else None

    def _step(vector: np.ndarray) -> np.ndarray:
        return gamma * scale * (at_lattice.T @ (projections - at_lattice @ vector))

    vector, trace = _iterate("frame", _step, space.dimension, tol, max_steps, target, contraction=eta)
    return space.coefficients(vector), trace
