"""Self-test checks run by ``mradon selftest``.

Each check is a small end-to-end experiment at desk scale that either
confirms an exact identity or a bracket derived from the theory.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.discretize import (
    compute_cubature,
    discrete_invert_funk_radon,
    discrete_invert_so3,
    moment_residuals,
    product_bandwidth,
    product_cubature,
)
from ..core.frames import atom_in_band, build_frame, frame_atom, frame_energy_defect, partition_residual
from ..core.geometry import generate_lattice, icosahedral_lattice
from ..core.reconstruct import frame_algorithm, iterative_reconstruct
from ..core.spaces import (
    layout_eigenvalues,
    l2_norm,
    linear_combination,
    max_abs_difference,
    parity_parts,
    random_coefficients,
    required_exactness,
    synthesize,
    weyl_dimension,
)
from ..core.splines import functional_values, interpolate_function, optimality_check, spline_inversion_funk_radon
from ..core.transforms import (
    forward,
    funk_radon_geometric,
    hemispherical_geometric,
    inverse,
    so3_radon_geometric,
    transform_pointwise,
)
from ..errors import MRadonError
from ..models import (
    Functional,
    FunctionalKind,
    FunctionalSet,
    GreatCircle,
    HarmonicCoefficients,
    Manifold,
    TransformKind,
    degree_eigenvalue,
    max_degree_for,
)
from ..protocols import AcceptanceCheck
from ..reporters.reporter_service import ReportTable

logger = logging.getLogger(__name__)


def _result(passed: bool, detail: str) -> Dict[str, Any]:
    return {"passed": bool(passed), "detail": detail}


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _relative_error(result: HarmonicCoefficients, truth: HarmonicCoefficients) -> float:
    return l2_norm(linear_combination(result, truth, 1.0, -1.0)) / l2_norm(truth)


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _point_functionals(points: np.ndarray) -> FunctionalSet:
    return FunctionalSet(Manifold.S2, tuple(Functional(FunctionalKind.POINT, tuple(p)) for p in points))


class MultiplierOracleCheck:
    """Multiplier tables agree with the geometric quadratures."""

    name = "multipliers"

    def run(self, seed: int) -> Dict[str, Any]:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for k in range(13):
            c = random_coefficients(Manifold.S2, degree_eigenvalue(k), rng, degrees=[k])
            pole = rng.standard_normal(3)
            pole /= np.linalg.norm(pole)

            def f(points: np.ndarray, c: HarmonicCoefficients = c) -> np.ndarray:
                return synthesize(c, points)

            expected = transform_pointwise(TransformKind.FUNK_RADON, c, pole[None, :])[0]
            worst = max(worst, _relative_gap(funk_radon_geometric(f, GreatCircle(pole), q=256), expected))
            expected = transform_pointwise(TransformKind.HEMISPHERICAL, c, pole[None, :])[0]
            worst = max(worst, _relative_gap(hemispherical_geometric(f, pole, nodes=32), expected))
        for k in range(4):
            c = random_coefficients(Manifold.SO3, degree_eigenvalue(k), rng, degrees=[k])
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            x /= np.linalg.norm(x)
            y /= np.linalg.norm(y)
            image = forward(TransformKind.SO3_RADON, c)
            expected = float(synthesize(image, np.concatenate([x, y])[None, :])[0])
            value = so3_radon_geometric(lambda g, c=c: synthesize(c, g), x, y, q=128)
            worst = max(worst, _relative_gap(value, expected))
        return _result(worst < 1e-9, f"max relative gap {worst:.3g}")


class RoundTripCheck:
    """inverse(forward(c)) recovers admissible coefficients."""

    name = "round_trips"

    def run(self, seed: int) -> Dict[str, Any]:
        rng = np.random.default_rng(seed)
        s2 = random_coefficients(Manifold.S2, 30.0, rng)
        parts = parity_parts(s2)
        cases = {
            TransformKind.FUNK_RADON: parts["even"],
            TransformKind.HEMISPHERICAL: parts["odd"],
            TransformKind.SO3_RADON: random_coefficients(Manifold.SO3, 30.0, rng),
        }
        worst = 0.0
        for kind, c in cases.items():
            worst = max(worst, max_abs_difference(inverse(kind, forward(kind, c)), c))
        return _result(worst < 1e-12, f"max coefficient error {worst:.3g}")


class DiscreteInversionCheck:
    """Inversion from cubature samples is exact on every low-degree basis function.

    Funk-Radon: every even ``Y_k^i`` with ``k(k+1) <= 12``. SO(3): every
    ``T_k^{ij}`` with ``k(k+1) <= 6`` from a product cubature on S2xS2.
    """

    name = "discrete_inversion"

    SPHERE_OMEGA = 12.0
    ROTATION_OMEGA = 6.0

    def run(self, seed: int) -> Dict[str, Any]:
        sphere = compute_cubature(
            generate_lattice(Manifold.S2, 0.35, seed=seed), product_bandwidth(self.SPHERE_OMEGA, self.SPHERE_OMEGA)
        )
        sphere_error = 0.0
        for k in range(0, max_degree_for(self.SPHERE_OMEGA) + 1, 2):
            for i in range(1, 2 * k + 2):
                truth = HarmonicCoefficients.from_entries(Manifold.S2, self.SPHERE_OMEGA, {(k, i): 1.0})
                samples = transform_pointwise(TransformKind.FUNK_RADON, truth, sphere.lattice.points)
                result = discrete_invert_funk_radon(samples, sphere, self.SPHERE_OMEGA)
                sphere_error = max(sphere_error, max_abs_difference(result.coefficients, truth))

        factor = compute_cubature(
            generate_lattice(Manifold.S2, 0.5, seed=seed + 1), required_exactness(Manifold.SO3, self.ROTATION_OMEGA)
        )
        product = product_cubature(factor, factor)
        rotation_error = 0.0
        for k in range(max_degree_for(self.ROTATION_OMEGA) + 1):
            for i in range(1, 2 * k + 2):
                for j in range(1, 2 * k + 2):
                    truth = HarmonicCoefficients.from_entries(Manifold.SO3, self.ROTATION_OMEGA, {(k, i, j): 1.0})
                    image = forward(TransformKind.SO3_RADON, truth)
                    samples = synthesize(image, product.lattice.points)
                    result = discrete_invert_so3(samples, product, self.ROTATION_OMEGA)
                    rotation_error = max(rotation_error, max_abs_difference(result, truth))
        return _result(
            max(sphere_error, rotation_error) < 1e-8,
            f"max coefficient error {sphere_error:.3g} on S2 ({sphere.lattice.size} nodes), "
            f"{rotation_error:.3g} on SO3 ({product.lattice.size} nodes)",
        )


class SplineInterpolationCheck:
    """Splines interpolate and are the centre of the interpolant set."""

    name = "spline_interpolation"

    def run(self, seed: int) -> Dict[str, Any]:
        functionals = _point_functionals(icosahedral_lattice().points)
        rng = np.random.default_rng(seed)
        f = random_coefficients(Manifold.S2, 12.0, rng)
        spline = interpolate_function(f, functionals, 4.0)
        residual = float(np.max(np.abs(functional_values(functionals, spline.coefficients) - spline.values)))
        report = optimality_check(spline, f, trials=100, seed=seed)
        passed = residual < 1e-9 and report.passed
        return _result(
            passed,
            f"residual {residual:.3g}, {report.minimality_violations}/{report.trials} minimality violations",
        )


class CubatureCheck:
    """Positive weights, unit mass, exact moments and weights of size ``1/omega``.

    Each bandwidth gets a lattice with ``rho * sqrt(omega) = 2``, so the
    scaled weights ``mu * omega`` stay in a bracket independent of omega.
    """

    name = "cubature"

    DENSITY = 2.0
    # Voronoi cells hold a rho/4 ball and sit inside a rho/2 ball; the active set keeps 5% of a cell
    WEIGHT_BRACKET = (2e-4, 1.0)

    def run(self, seed: int) -> Dict[str, Any]:
        worst_residual = 0.0
        worst_mass = 0.0
        positive = True
        scaled: List[float] = []
        for omega in (6.0, 12.0, 20.0):
            lattice = generate_lattice(Manifold.S2, self.DENSITY / math.sqrt(omega), seed=seed)
            cubature = compute_cubature(lattice, omega)
            residual, _ = moment_residuals(cubature)
            worst_residual = max(worst_residual, residual)
            worst_mass = max(worst_mass, abs(float(np.sum(cubature.weights)) - 1.0))
            positive = positive and bool(np.all(cubature.weights > 0))
            scaled.extend([float(cubature.weights.min()) * omega, float(cubature.weights.max()) * omega])
        low, high = self.WEIGHT_BRACKET
        in_bracket = all(low <= value <= high for value in scaled)
        passed = worst_residual <= 1e-10 and positive and worst_mass <= 1e-10 and in_bracket
        return _result(
            passed,
            f"moment residual {worst_residual:.3g}, mass defect {worst_mass:.3g}, "
            f"mu*omega in [{min(scaled):.3g}, {max(scaled):.3g}]",
        )


class LatticeCardinalityCheck:
    """Lattice sizes scale like rho^-2 and Weyl counts match enumeration."""

    name = "lattice_cardinality"

    # disjoint rho/4 balls and covering rho/2 balls on the unit sphere
    BRACKET = (14.0, 65.0)

    def run(self, seed: int) -> Dict[str, Any]:
        products: List[float] = []
        for rho in (0.4, 0.2, 0.1):
            lattice = generate_lattice(Manifold.S2, rho, seed=seed)
            products.append(lattice.size * rho**2)
        low, high = self.BRACKET
        in_bracket = all(low <= p <= high for p in products)
        weyl_ok = True
        for manifold in (Manifold.S2, Manifold.SO3, Manifold.S2XS2):
            for omega in (0.0, 6.0, 20.0, 42.0):
                counted = int(np.sum(layout_eigenvalues(manifold, 12) <= omega + 1e-9))
                weyl_ok = weyl_ok and counted == weyl_dimension(manifold, omega)
        products_text = ", ".join(f"{p:.2f}" for p in products)
        return _result(in_bracket and weyl_ok, f"|M|rho^2 = {products_text}; Weyl counts {'match' if weyl_ok else 'differ'}")


class ParsevalFrameCheck:
    """Frame energy equals the L2 energy and atoms stay inside their bands."""

    name = "parseval_frame"

    J_MAX = 3
    FUNCTIONS = 50

    def run(self, seed: int) -> Dict[str, Any]:
        fs = build_frame(self.J_MAX, seed=seed)
        rng = np.random.default_rng(seed)
        defects = [
            frame_energy_defect(random_coefficients(Manifold.S2, fs.coverage, rng), fs)
            for _ in range(self.FUNCTIONS)
        ]
        partition = partition_residual(fs.filter_bank, np.linspace(0.0, 2.0 * fs.coverage, 2001))
        stray = [
            (level.j, k)
            for level in fs.levels
            for k in (0, level.cubature.lattice.size - 1)
            if not atom_in_band(frame_atom(fs, level.j, k), level.j)
        ]
        worst = max(defects)
        return _result(
            worst < 1e-9 and partition < 1e-14 and not stray,
            f"max energy defect {worst:.3g} over {len(defects)} functions, partition residual {partition:.3g}, "
            f"{len(stray)} atoms outside their band",
        )


class VoronoiIterationCheck:
    """Voronoi iteration converges geometrically to a bandlimited function."""

    name = "voronoi_iteration"

    def run(self, seed: int) -> Dict[str, Any]:
        omega = 6.0
        lattice = generate_lattice(Manifold.S2, 0.25, seed=seed)
        rng = np.random.default_rng(seed)
        truth = random_coefficients(Manifold.S2, omega, rng)
        samples = synthesize(truth, lattice.points)
        result, trace = iterative_reconstruct(samples, lattice, omega, tol=1e-10, max_steps=200, truth=truth)
        error = _relative_error(result, truth)
        return _result(
            trace.converged and error < 1e-8,
            f"{trace.steps} steps, contraction {trace.contraction:.3g}, relative error {error:.3g}",
        )


class FrameAlgorithmCheck:
    """The relaxed frame iteration contracts at the rate its frame bounds predict."""

    name = "frame_algorithm"

    SLACK = 0.05

    def run(self, seed: int) -> Dict[str, Any]:
        omega = 6.0
        lattice = generate_lattice(Manifold.S2, 0.25, seed=seed)
        rng = np.random.default_rng(seed)
        truth = random_coefficients(Manifold.S2, omega, rng)
        samples = synthesize(truth, lattice.points)
        result, trace = frame_algorithm(samples, lattice, omega, tol=1e-10, truth=truth)
        measured = max(trace.ratios(), default=0.0)
        error = _relative_error(result, truth)
        return _result(
            trace.converged and measured <= trace.contraction + self.SLACK and error < 1e-8,
            f"{trace.steps} steps, measured ratio {measured:.3g} against eta {trace.contraction:.3g}",
        )


class SplineConvergenceCheck:
    """Spline errors fall at the predicted rate in rho and across inversion levels.

    Point-evaluation splines of ``f in E_6`` on lattices one octave apart
    must show a log-log slope of at least ``MIN_SLOPE``. The Funk-Radon
    spline inversion on the icosahedron axes must improve at every level;
    a sparse set keeps the Gram system solvable at the finest level.
    """

    name = "spline_convergence"

    RHOS = (0.8, 0.4, 0.2)
    SMOOTHNESS = 3.5
    MIN_SLOPE = 3.5
    LEVELS = (0, 1, 2)

    def run(self, seed: int) -> Dict[str, Any]:
        rng = np.random.default_rng(seed)
        f = random_coefficients(Manifold.S2, 6.0, rng)
        errors = []
        for rho in self.RHOS:
            lattice = generate_lattice(Manifold.S2, rho, seed=seed)
            spline = interpolate_function(f, _point_functionals(lattice.points), self.SMOOTHNESS)
            errors.append(_relative_error(spline.coefficients, f))
        slope = float(np.polyfit(np.log(self.RHOS), np.log(errors), 1)[0])

        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, rng))["even"]
        axes = icosahedral_lattice().points
        samples = transform_pointwise(TransformKind.FUNK_RADON, truth, axes)
        level_errors = [
            _relative_error(spline_inversion_funk_radon(axes, samples, 0.0, level), truth) for level in self.LEVELS
        ]
        passed = slope >= self.MIN_SLOPE and _strictly_decreasing(errors) and _strictly_decreasing(level_errors)
        errors_text = ", ".join(f"{e:.3g}" for e in errors)
        levels_text = ", ".join(f"{e:.3g}" for e in level_errors)
        return _result(passed, f"errors {errors_text} (slope {slope:.2f}); level errors {levels_text}")


ALL_CHECKS: List[AcceptanceCheck] = [
    MultiplierOracleCheck(),
    RoundTripCheck(),
    DiscreteInversionCheck(),
    SplineInterpolationCheck(),
    SplineConvergenceCheck(),
    CubatureCheck(),
    LatticeCardinalityCheck(),
    ParsevalFrameCheck(),
    VoronoiIterationCheck(),
    FrameAlgorithmCheck(),
]


def run_checks(seed: int = 0, only: Optional[str] = None) -> ReportTable:
    """Run the checks (or just ``only``) and tabulate their outcome.

    A check that raises a library error counts as failed.

    Raises:
        KeyError: If ``only`` names no check
    """
    checks = ALL_CHECKS
    if only is not None:
        checks = [check for check in ALL_CHECKS if check.name == only]
        if not checks:
            raise KeyError(only)
    table = ReportTable(title="Self-test", columns=["check", "passed", "detail"])
    for check in checks:
        logger.info(f"Running check {check.name}")
        try:
            outcome = check.run(seed)
        except MRadonError as e:
            outcome = _result(False, f"{type(e).__name__}: {e}")
        table.add_row(check.name, outcome["passed"], outcome["detail"])
    return table


def all_passed(table: ReportTable) -> bool:
    return all(row[1] for row in table.rows)


def check_names() -> List[str]:
    return [check.name for check in ALL_CHECKS]


__all__ = ["ALL_CHECKS", "all_passed", "check_names", "run_checks"]
