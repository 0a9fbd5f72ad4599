"""Variational splines for arbitrary measurement functionals.

A spline for functionals F_1..F_N, data v and smoothness t is the function of
least ``(I - a L)^{t/2}`` norm with ``F_nu(s) = v_nu``. It is
``s = sum_nu alpha_nu (I - a L)^{-t} F_nu`` where ``beta alpha = v`` and
``beta_{nu mu} = sum_j (1 + a lambda_j)^{-t} F_nu(u_j) F_mu(u_j)`` over an
orthonormal eigenbasis ``u_j``. Functional values on basis functions are
spectral (transform multipliers), so Gram entries reduce to Legendre series
by the addition theorem.
"""

import logging
import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import linalg
from scipy.spatial import cKDTree

from ..errors import PreconditionError, SplineSolveError
from ..models import (
    DegreeKey,
    Functional,
    FunctionalKind,
    FunctionalSet,
    HarmonicCoefficients,
    Manifold,
    OptimalityReport,
    SobolevOrder,
    Spline,
    TransformKind,
    degree_eigenvalue,
)
from .harmonics import DEFAULT_WIGNER_MAX_DEGREE, sph_harmonic_blocks
from .parallel import assemble_rows
from .spaces import (
    delta_projection,
    from_vector,
    layout_eigenvalues,
    layout_keys,
    parity_parts,
    synthesize,
    to_vector,
)
from .transforms import (
    funk_radon_forward,
    funk_radon_inverse,
    hemispherical_forward,
    multiplier_table,
    so3_radon_forward,
    so3_radon_inverse,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEGREE = 512
TRUNCATION_TOL = 1e-12
INITIAL_DEGREE = 8


def minimum_smoothness(manifold: Manifold) -> float:
    """Half the dimension: the Gram series converges only for larger t."""
    return manifold.dimension / 2.0


def _check_smoothness(manifold: Manifold, t: float) -> None:
    minimum = minimum_smoothness(manifold)
    if not t > minimum:
        raise PreconditionError(
            f"Smoothness t={t} too small on {manifold.value}: the Gram series needs t > {minimum}"
        )


def _sobolev_weights(manifold: Manifold, t: float, k_max: int) -> np.ndarray:
    """(1 + a*k(k+1))^{-t} for k = 0..k_max."""
    lam = np.array([degree_eigenvalue(k) for k in range(k_max + 1)])
    return (1.0 + manifold.sobolev_scale * lam) ** (-t)


def kind_multipliers(kind: FunctionalKind, k_max: int) -> np.ndarray:
    """Per-degree factor a_k with ``F(Y_k^i) = a_k Y_k^i(position)`` for S2 functionals."""
    degrees = np.arange(k_max + 1)
    if kind == FunctionalKind.POINT:
        return np.ones(k_max + 1)
    if kind == FunctionalKind.SYM_PAIR:
        return 1.0 + (-1.0) ** degrees
    if kind == FunctionalKind.CIRCLE:
        return np.array(multiplier_table(TransformKind.FUNK_RADON, k_max).values)
    if kind == FunctionalKind.HEMISPHERE:
        return np.array(multiplier_table(TransformKind.HEMISPHERICAL, k_max).values)
    raise PreconditionError(f"{kind.value} is not an S2 functional")


def _positions(functionals: FunctionalSet) -> np.ndarray:
    return np.array([f.position for f in functionals], dtype=float)


def _tail_bound(manifold: Manifold, t: float, k: int) -> float:
    """Upper estimate of the Gram diagonal tail beyond degree k."""
    base = float(k * k + k)
    if manifold == Manifold.S2:
        return 4.0 * base ** (1.0 - t) / (t - 1.0)
    if manifold == Manifold.SO3:
        return 4.0 ** (-t) * base ** (1.0 - t) / (t - 1.0)
    return 2.0 * (
        2.0 ** (-t) * base ** (1.0 - t) / (t - 1.0)
        + 2.0 ** (1.0 - t) * base ** (2.0 - t) / (2.0 * (t - 1.0) * (t - 2.0))
    )


def adaptive_truncation(
    manifold: Manifold,
    t: float,
    diagonal: float,
    max_degree: int = DEFAULT_MAX_DEGREE,
    tol: float = TRUNCATION_TOL,
) -> int:
    """Smallest doubling of degree 8 whose tail bound is below ``tol * diagonal``.

    Capped at ``max_degree`` with a warning when the bound is not met.
    """
    _check_smoothness(manifold, t)
    k = INITIAL_DEGREE
    while _tail_bound(manifold, t, k) >= tol * diagonal and k < max_degree:
        k *= 2
    k = min(k, max_degree)
    if _tail_bound(manifold, t, k) >= tol * diagonal:
        logger.warning(
            f"Gram truncation capped at degree {k} for t={t}; tail bound "
            f"{_tail_bound(manifold, t, k):.3g} exceeds {tol:g} of the diagonal"
        )
    return k


def _degree_coefficients(functionals: FunctionalSet, t: float, k_max: int) -> Dict[Tuple[FunctionalKind, FunctionalKind], np.ndarray]:
    """Legendre coefficients of the Gram kernel for every pair of S2 functional kinds."""
    weights = _sobolev_weights(Manifold.S2, t, k_max) * (2.0 * np.arange(k_max + 1) + 1.0)
    kinds = sorted({f.kind for f in functionals}, key=lambda kind: kind.value)
    multipliers = {kind: kind_multipliers(kind, k_max) for kind in kinds}
    return {
        (a, b): weights * multipliers[a] * multipliers[b] for a in kinds for b in kinds
    }


def _gram_diagonal(functionals: FunctionalSet, t: float, k_max: int) -> np.ndarray:
    """Gram diagonal truncated at ``k_max`` (a lower bound of the full diagonal)."""
    manifold = functionals.manifold
    if manifold == Manifold.S2:
        coefficients = _degree_coefficients(functionals, t, k_max)
        return np.array([coefficients[(f.kind, f.kind)].sum() for f in functionals])
    if manifold == Manifold.SO3:
        degrees = np.arange(k_max + 1)
        kappa = multiplier_table(TransformKind.SO3_RADON, k_max).values
        value = np.sum(_sobolev_weights(Manifold.SO3, t, k_max) * (2.0 * degrees + 1.0) ** 3 * kappa**2)
        return np.full(len(functionals), value)
    return np.full(len(functionals), _product_kernel(t, k_max).sum())


def _product_kernel(t: float, k_max: int) -> np.ndarray:
    """C[k1, k2] = (1 + 2(lambda1 + lambda2))^{-t} (2k1+1)(2k2+1)."""
    lam = np.array([degree_eigenvalue(k) for k in range(k_max + 1)])
    dims = 2.0 * np.arange(k_max + 1) + 1.0
    return (1.0 + 2.0 * (lam[:, None] + lam[None, :])) ** (-t) * np.outer(dims, dims)


def assemble_gram(functionals: FunctionalSet, t: float, k_max: int, threads: int = 1) -> np.ndarray:
    """Gram matrix of the functional set, truncated at degree ``k_max``.

    Args:
        functionals: Functional set
        t: Smoothness exponent
        k_max: Truncation degree (per factor on S2xS2)
        threads: Row-parallel workers

    Returns:
        Symmetric ``(N, N)`` matrix

    Raises:
        PreconditionError: If t is too small for the series to converge
    """
    manifold = functionals.manifold
    _check_smoothness(manifold, t)
    positions = _positions(functionals)
    n = len(functionals)

    if manifold == Manifold.S2:
        coefficients = _degree_coefficients(functionals, t, k_max)
        kinds = np.array([f.kind for f in functionals], dtype=object)

        def fill(rows: slice) -> np.ndarray:
            dots = np.clip(positions[rows] @ positions.T, -1.0, 1.0)
            out = np.zeros(dots.shape)
            row_kinds = kinds[rows]
            for (a, b), coef in coefficients.items():
                mask = np.outer(row_kinds == np.array(a, dtype=object), kinds == np.array(b, dtype=object))
                if mask.any():
                    out[mask] = legendre.legval(dots[mask], coef)
            return out

    elif manifold == Manifold.SO3:
        degrees = np.arange(k_max + 1)
        kappa = multiplier_table(TransformKind.SO3_RADON, k_max).values
        coef = _sobolev_weights(Manifold.SO3, t, k_max) * (2.0 * degrees + 1.0) ** 3 * kappa**2

        def fill(rows: slice) -> np.ndarray:
            u = np.clip(positions[rows, :3] @ positions[:, :3].T, -1.0, 1.0)
            v = np.clip(positions[rows, 3:] @ positions[:, 3:].T, -1.0, 1.0)
            vu = legendre.legvander(u.ravel(), k_max)
            vv = legendre.legvander(v.ravel(), k_max)
            return ((vu * vv) @ coef).reshape(u.shape)

    else:
        kernel = _product_kernel(t, k_max)

        def fill(rows: slice) -> np.ndarray:
            u = np.clip(positions[rows, :3] @ positions[:, :3].T, -1.0, 1.0)
            v = np.clip(positions[rows, 3:] @ positions[:, 3:].T, -1.0, 1.0)
            vu = legendre.legvander(u.ravel(), k_max)
            vv = legendre.legvander(v.ravel(), k_max)
            return np.einsum("mi,ij,mj->m", vu, kernel, vv).reshape(u.shape)

    gram = assemble_rows(n, n, fill, threads=threads)
    return 0.5 * (gram + gram.T)


def functional_blocks(functionals: FunctionalSet, k_max: int) -> Iterator[Tuple[DegreeKey, np.ndarray]]:
    """Yield ``(key, rows)`` with ``rows[nu] = F_nu`` applied to the orthonormal layout block ``key``."""
    manifold = functionals.manifold
    positions = _positions(functionals)
    if manifold == Manifold.S2:
        factors = np.stack([kind_multipliers(f.kind, k_max) for f in functionals])
        for k, block in sph_harmonic_blocks(k_max, positions):
            yield k, block * factors[:, k][:, None]
        return
    first = dict(sph_harmonic_blocks(k_max, positions[:, :3]))
    second = dict(sph_harmonic_blocks(k_max, positions[:, 3:]))
    if manifold == Manifold.SO3:
        kappa = multiplier_table(TransformKind.SO3_RADON, k_max).values
        for k in range(k_max + 1):
            outer = np.einsum("ni,nj->nij", first[k], second[k]).reshape(len(functionals), -1)
            yield k, math.sqrt(2 * k + 1) * kappa[k] * outer
        return
    for k1, k2 in layout_keys(manifold, k_max):  # type: ignore[misc]
        yield (k1, k2), np.einsum("ni,nj->nij", first[k1], second[k2]).reshape(len(functionals), -1)


def functional_matrix(functionals: FunctionalSet, k_max: int) -> np.ndarray:
    """Functionals applied to the orthonormal layout basis, shape ``(N, D)``."""
    return np.concatenate([rows for _, rows in functional_blocks(functionals, k_max)], axis=1)


def spline_coefficients(functionals: FunctionalSet, alpha: np.ndarray, t: float, k_max: int) -> HarmonicCoefficients:
    """Spectral coefficients ``(1 + a lambda)^{-t} sum_nu alpha_nu F_nu(u_j)``."""
    manifold = functionals.manifold
    weights = layout_eigenvalues(manifold, k_max)
    weights = (1.0 + manifold.sobolev_scale * weights) ** (-t)
    parts = [rows.T @ alpha for _, rows in functional_blocks(functionals, k_max)]
    vector = weights * np.concatenate(parts)
    omega = degree_eigenvalue(k_max) * (2.0 if manifold == Manifold.S2XS2 else 1.0)
    return from_vector(manifold, vector, k_max, omega)


def functional_values(functionals: FunctionalSet, c: HarmonicCoefficients) -> np.ndarray:
    """Apply every functional to the function with coefficients ``c`` (spectrally exact).

    Raises:
        PreconditionError: On manifold mismatch
    """
    if c.manifold != functionals.manifold:
        raise PreconditionError(
            f"Functionals act on {functionals.manifold.value}, coefficients live on {c.manifold.value}"
        )
    positions = _positions(functionals)
    kinds = np.array([f.kind for f in functionals], dtype=object)
    out = np.zeros(len(functionals))
    for kind in set(kinds):
        mask = kinds == np.array(kind, dtype=object)
        where = positions[mask]
        if kind == FunctionalKind.POINT:
            out[mask] = synthesize(c, where)
        elif kind == FunctionalKind.SYM_PAIR:
            out[mask] = synthesize(c, where) + synthesize(c, -where)
        elif kind == FunctionalKind.CIRCLE:
            out[mask] = synthesize(funk_radon_forward(c), where)
        elif kind == FunctionalKind.HEMISPHERE:
            out[mask] = synthesize(hemispherical_forward(c), where)
        else:
            out[mask] = synthesize(so3_radon_forward(c), where)
    return out


def functional_apply(functional: Functional, c: HarmonicCoefficients) -> float:
    """Value ``F(f)`` of one functional."""
    return float(functional_values(FunctionalSet(functional.manifold, (functional,)), c)[0])


def choose_truncation(
    functionals: FunctionalSet,
    t: float,
    max_degree: int = DEFAULT_MAX_DEGREE,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
) -> int:
    """Truncation degree for the Gram series of ``functionals``."""
    _check_smoothness(functionals.manifold, t)
    cap = max_degree
    if functionals.manifold == Manifold.SO3:
        cap = min(max_degree, wigner_max_degree)
    diagonal = float(np.min(_gram_diagonal(functionals, t, INITIAL_DEGREE), initial=1.0))
    return adaptive_truncation(functionals.manifold, t, diagonal, cap)


def _cholesky_solve(gram: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Solve ``gram @ alpha = values`` by Cholesky with one refinement step.

    Raises:
        SplineSolveError: If the matrix is not numerically positive definite
    """
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as exc:
        smallest = float(linalg.eigvalsh(gram, subset_by_index=[0, 0])[0])
        raise SplineSolveError(
            f"Gram matrix is not positive definite (smallest eigenvalue {smallest:.3g}); "
            f"functionals may coincide or the truncation is too coarse",
            smallest_eigenvalue=smallest,
        ) from exc
    alpha = linalg.cho_solve(factor, values)
    alpha = alpha + linalg.cho_solve(factor, values - gram @ alpha)
    if logger.isEnabledFor(logging.DEBUG) and gram.shape[0] <= 2000:
        logger.debug(f"Gram condition number {np.linalg.cond(gram):.3g}")
    return alpha


def solve_spline(
    functionals: FunctionalSet,
    values: Sequence[float],
    t: float,
    max_degree: int = DEFAULT_MAX_DEGREE,
    wigner_max_degree: int = DEFAULT_WIGNER_MAX_DEGREE,
    threads: int = 1,
) -> Spline:
    """Solve the spline problem ``F_nu(s) = v_nu`` with smoothness ``t``.

    Args:
        functionals: Functional set
        values: Target values, one per functional
        t: Smoothness exponent
        max_degree: Cap for the adaptive truncation
        wigner_max_degree: Additional cap on SO(3)
        threads: Row-parallel workers for Gram assembly

    Returns:
        Solved spline

    Raises:
        PreconditionError: If t is too small or the value count does not match
        SplineSolveError: If the Gram matrix is not positive definite
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size != len(functionals):
        raise PreconditionError(f"{v.size} values for {len(functionals)} functionals")
    k_max = choose_truncation(functionals, t, max_degree, wigner_max_degree)
    gram = assemble_gram(functionals, t, k_max, threads)
    alpha = _cholesky_solve(gram, v)
    residual = float(np.max(np.abs(gram @ alpha - v), initial=0.0))
    scale = float(np.max(np.abs(v), initial=0.0))
    if residual > 1e-10 * max(scale, 1e-300):
        logger.warning(f"Spline residual {residual:.3g} above 1e-10 of the data scale {scale:.3g}")
    logger.info(f"Solved {functionals.manifold.value} spline: N={len(functionals)}, t={t}, K_max={k_max}")
    return Spline(
        functionals=functionals,
        t=t,
        k_max=k_max,
        alpha=alpha,
        gram=gram,
        coefficients=spline_coefficients(functionals, alpha, t, k_max),
        values=v,
    )


def interpolate_function(f: HarmonicCoefficients, functionals: FunctionalSet, t: float, **options: int) -> Spline:
    """Spline of ``f``: the spline whose functional values agree with those of ``f``."""
    return solve_spline(functionals, functional_values(functionals, f), t, **options)


def _antipodes(points: np.ndarray) -> np.ndarray:
    dist, idx = cKDTree(points).query(-points, k=1)
    if np.any(dist > 1e-9):
        raise PreconditionError("Sample set is not antipodally symmetric")
    return idx


def spline_inversion_funk_radon(
    points: np.ndarray,
    values: np.ndarray,
    t: float,
    level: int,
    **options: int,
) -> HarmonicCoefficients:
    """Approximate an even f from samples of its Funk-Radon transform.

    Builds the spline of smoothness ``2^level * 2 + t + 1/2`` for the
    point-pair functionals ``g(x) + g(-x)`` on ``Rf`` and inverts the
    transform on its even part.

    Args:
        points: Symmetric set of sample points
        values: ``Rf`` at the points
        t: Target smoothness
        level: Refinement level l >= 0

    Raises:
        PreconditionError: If the points are not symmetric
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    antipodes = _antipodes(points)
    representatives = [i for i in range(points.shape[0]) if i < antipodes[i]]
    functionals = FunctionalSet(
        Manifold.S2, tuple(Functional(FunctionalKind.SYM_PAIR, tuple(points[i])) for i in representatives)
    )
    pair_values = values[representatives] + values[antipodes[representatives]]
    tau = 2.0**level * 2.0 + t + 0.5
    spline = solve_spline(functionals, pair_values, tau, **options)
    return funk_radon_inverse(parity_parts(spline.coefficients)["even"])


def spline_inversion_hemispherical(
    points: np.ndarray,
    values: np.ndarray,
    level: int,
    t: float = 0.0,
    **options: int,
) -> HarmonicCoefficients:
    """Approximate an odd f from hemisphere integrals ``Tf`` at the given poles.

    The hemisphere-integral spline of smoothness ``2^level * 2 + t`` already
    approximates f itself, so only its odd part is kept.
    """
    points = np.asarray(points, dtype=float)
    functionals = FunctionalSet(
        Manifold.S2, tuple(Functional(FunctionalKind.HEMISPHERE, tuple(p)) for p in points)
    )
    tau = 2.0**level * 2.0 + t
    spline = solve_spline(functionals, values, tau, **options)
    return parity_parts(spline.coefficients)["odd"]


def spline_inversion_so3(
    points: np.ndarray,
    values: np.ndarray,
    t: float,
    level: int,
    **options: int,
) -> HarmonicCoefficients:
    """Approximate f on SO(3) from samples of its Radon transform on S2xS2.

    Point-evaluation spline of smoothness ``2^{level+2} + t + 1`` on S2xS2,
    projected onto the equal-degree subspace and inverted.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 6)
    functionals = FunctionalSet(
        Manifold.S2XS2, tuple(Functional(FunctionalKind.POINT, tuple(p)) for p in points)
    )
    tau = 2.0 ** (level + 2) + t + 1.0
    spline = solve_spline(functionals, values, tau, **options)
    return so3_radon_inverse(delta_projection(spline.coefficients))


def _truncate_to_layout(c: HarmonicCoefficients, k_max: int) -> HarmonicCoefficients:
    blocks = {}
    for key, block in c.blocks.items():
        top = max(key) if isinstance(key, tuple) else key
        if top <= k_max:
            blocks[key] = block
    return HarmonicCoefficients(manifold=c.manifold, omega=c.omega, blocks=blocks)


def optimality_check(spline: Spline, f: HarmonicCoefficients, trials: int, seed: int = 0) -> OptimalityReport:
    """Randomized check that the spline is the centre of the interpolant set.

    Interpolants ``h = s + u`` with ``F(u) = 0`` are sampled in the truncated
    space, in opposite pairs (so an odd count is rounded up) and with Sobolev norm at most ``||f||_t``.

    Args:
        spline: Solved spline interpolating ``f``
        f: Interpolated function
        trials: Number of sampled interpolants
        seed: Random seed

    Returns:
        Optimality report
    """
    if trials <= 0:
        return OptimalityReport(0, 0, 0.0, 0.0, 0.0)
    manifold = spline.functionals.manifold
    k_max = spline.k_max
    order = SobolevOrder.for_manifold(manifold, spline.t)
    weights = (1.0 + order.a * layout_eigenvalues(manifold, k_max)) ** order.t

    def norm(vector: np.ndarray) -> float:
        return float(np.sqrt(np.sum(weights * vector * vector)))

    s_vec = to_vector(spline.coefficients, k_max)
    f_vec = to_vector(_truncate_to_layout(f, k_max), k_max)
    s_norm = norm(s_vec)
    radius = math.sqrt(max(norm(f_vec) ** 2 - s_norm**2, 0.0)) or max(s_norm, 1.0) * 1e-3

    basis, _ = linalg.qr(functional_matrix(spline.functionals, k_max).T, mode="economic")
    rng = np.random.default_rng(seed)
    samples: List[np.ndarray] = []
    violations = 0
    orthogonality = 0.0
    while len(samples) < trials:
        z = rng.standard_normal(s_vec.size) / np.sqrt(weights)
        u = z - basis @ (basis.T @ z)
        u_norm = norm(u)
        if u_norm == 0.0:
            break
        u /= u_norm
        orthogonality = max(orthogonality, abs(float(np.sum(weights * s_vec * u))) / max(s_norm, 1e-300))
        r = radius * rng.uniform(0.05, 1.0)
        for sign in (1.0, -1.0):
            h = s_vec + sign * r * u
            if s_norm > norm(h) + 1e-10:
                violations += 1
            samples.append(h)

    stacked = np.array(samples)
    centre = max(norm(h - s_vec) for h in stacked)
    scaled = stacked * np.sqrt(weights)
    squared = np.sum(scaled**2, axis=1)
    pairwise = squared[:, None] + squared[None, :] - 2.0 * scaled @ scaled.T
    diameter = float(np.sqrt(max(float(np.max(pairwise)), 0.0)))
    report = OptimalityReport(
        trials=len(samples),
        minimality_violations=violations,
        max_orthogonality_defect=orthogonality,
        max_center_distance=centre,
        empirical_diameter=diameter,
    )
    logger.info(
        f"Optimality check: {report.trials} trials, {violations} violations, "
        f"orthogonality defect {orthogonality:.3g}"
    )
    return report
