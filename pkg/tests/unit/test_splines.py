"""Unit tests for variational splines and spline-based inversion."""

import logging

import numpy as np
import pytest

from mradon.core.geometry import generate_lattice, icosahedral_lattice, product_lattice
from mradon.core.spaces import l2_norm, linear_combination, parity_parts, random_coefficients, synthesize
from mradon.core.splines import (
    _cholesky_solve,
    adaptive_truncation,
    assemble_gram,
    functional_apply,
    functional_values,
    interpolate_function,
    kind_multipliers,
    minimum_smoothness,
    optimality_check,
    solve_spline,
    spline_inversion_funk_radon,
    spline_inversion_hemispherical,
    spline_inversion_so3,
)
from mradon.core.transforms import forward, transform_pointwise
from mradon.errors import PreconditionError, SplineSolveError
from mradon.models import (
    Functional,
    FunctionalKind,
    FunctionalSet,
    Manifold,
    TransformKind,
)


def _point_set(points):
    return FunctionalSet(Manifold.S2, tuple(Functional(FunctionalKind.POINT, tuple(p)) for p in points))


def _relative_error(result, truth):
    return l2_norm(linear_combination(result, truth, 1.0, -1.0)) / l2_norm(truth)


@pytest.fixture(scope="module")
def icosahedron():
    """Icosahedron vertices as a point functional set."""
    return _point_set(icosahedral_lattice().points)


@pytest.fixture(scope="module")
def symmetric_lattice():
    """Antipodally symmetric S2 lattice shared by the inversion tests."""
    return generate_lattice(Manifold.S2, 0.4, symmetric=True, seed=2)


class TestFunctionals:
    """Test suite for functional construction and evaluation."""

    def test_rejects_duplicates(self):
        """Test that repeated functionals are refused."""
        p = (0.0, 0.0, 1.0)

        with pytest.raises(PreconditionError, match="duplicates an earlier"):
            FunctionalSet(Manifold.S2, (Functional(FunctionalKind.POINT, p), Functional(FunctionalKind.POINT, p)))

    def test_antipodal_circles_coincide(self):
        """Test that a circle and its antipodal pole name the same functional."""
        with pytest.raises(PreconditionError, match="duplicates an earlier"):
            FunctionalSet(
                Manifold.S2,
                (
                    Functional(FunctionalKind.CIRCLE, (0.0, 0.0, 1.0)),
                    Functional(FunctionalKind.CIRCLE, (0.0, 0.0, -1.0)),
                ),
            )

    def test_rejects_manifold_mismatch(self):
        """Test that an S2xS2 point cannot join an S2 set."""
        with pytest.raises(PreconditionError):
            FunctionalSet(Manifold.S2, (Functional(FunctionalKind.POINT, (0, 0, 1, 1, 0, 0)),))

    def test_rejects_bad_position(self):
        """Test that positions need 3 or 6 reals."""
        with pytest.raises(PreconditionError, match="3 or 6"):
            Functional(FunctionalKind.POINT, (1.0, 0.0))

    def test_position_is_normalized(self):
        """Test that positions are projected onto the sphere."""
        functional = Functional(FunctionalKind.POINT, (0.0, 0.0, 2.0))

        assert functional.position == pytest.approx((0.0, 0.0, 1.0))

    def test_sym_pair_multipliers(self):
        """Test that point pairs double even degrees and kill odd ones."""
        a = kind_multipliers(FunctionalKind.SYM_PAIR, 5)

        assert a.tolist() == [2.0, 0.0, 2.0, 0.0, 2.0, 0.0]

    def test_sym_pair_value(self):
        """Test that a point pair adds the values at p and -p."""
        rng = np.random.default_rng(3)
        c = random_coefficients(Manifold.S2, 12.0, rng)
        p = np.array([0.6, 0.0, 0.8])
        pair = functional_apply(Functional(FunctionalKind.SYM_PAIR, tuple(p)), c)
        points = functional_values(_point_set([p, -p]), c)

        assert pair == pytest.approx(points.sum(), abs=1e-12)

    def test_circle_value_matches_transform(self):
        """Test that a circle functional samples the Funk-Radon transform."""
        rng = np.random.default_rng(4)
        c = random_coefficients(Manifold.S2, 20.0, rng)
        pole = np.array([0.0, 0.6, 0.8])
        value = functional_apply(Functional(FunctionalKind.CIRCLE, tuple(pole)), c)

        assert value == pytest.approx(transform_pointwise(TransformKind.FUNK_RADON, c, pole[None, :])[0], abs=1e-12)

    def test_values_reject_other_manifold(self, icosahedron):
        """Test that functionals refuse coefficients from another manifold."""
        c = random_coefficients(Manifold.SO3, 2.0, np.random.default_rng(0))

        with pytest.raises(PreconditionError):
            functional_values(icosahedron, c)


class TestTruncation:
    """Test suite for the adaptive Gram truncation."""

    def test_minimum_smoothness(self):
        """Test the half-dimension thresholds."""
        assert minimum_smoothness(Manifold.S2) == 1.0
        assert minimum_smoothness(Manifold.SO3) == 1.5
        assert minimum_smoothness(Manifold.S2XS2) == 2.0

    def test_doubles_from_eight(self):
        """Test that the degree is a doubling of the initial degree."""
        k = adaptive_truncation(Manifold.S2, 4.0, 1.0)

        assert k >= 8
        assert k & (k - 1) == 0

    def test_larger_smoothness_needs_fewer_degrees(self):
        """Test that rougher kernels are truncated later."""
        assert adaptive_truncation(Manifold.S2, 8.0, 1.0) <= adaptive_truncation(Manifold.S2, 3.0, 1.0)

    def test_cap_warns(self, caplog):
        """Test that the cap is honoured with a warning."""
        with caplog.at_level(logging.WARNING, logger="mradon.core.splines"):
            k = adaptive_truncation(Manifold.S2, 1.5, 1.0, max_degree=16)

        assert k == 16
        assert "capped" in caplog.text

    def test_rejects_small_smoothness(self):
        """Test that t at or below the threshold is refused."""
        with pytest.raises(PreconditionError, match="too small"):
            adaptive_truncation(Manifold.S2, 1.0, 1.0)


class TestSolveSpline:
    """Test suite for solving spline problems."""

    def test_interpolates(self, icosahedron):
        """Test that the spline reproduces its data."""
        rng = np.random.default_rng(5)
        f = random_coefficients(Manifold.S2, 12.0, rng)
        spline = interpolate_function(f, icosahedron, 4.0)
        residual = np.max(np.abs(functional_values(icosahedron, spline.coefficients) - spline.values))

        assert residual < 1e-9

    def test_evaluate_at_nodes(self, icosahedron):
        """Test that point evaluations of the spline match the data."""
        values = np.linspace(-1.0, 1.0, 12)
        spline = solve_spline(icosahedron, values, 3.0)

        assert np.allclose(spline.evaluate(icosahedral_lattice().points), values, atol=1e-9)

    def test_mixed_functionals(self):
        """Test interpolation with points, circles and hemispheres together."""
        points = icosahedral_lattice().points
        functionals = FunctionalSet(
            Manifold.S2,
            tuple(Functional(FunctionalKind.CIRCLE, tuple(p)) for p in points[:4])
            + tuple(Functional(FunctionalKind.POINT, tuple(p)) for p in points[4:8])
            + tuple(Functional(FunctionalKind.HEMISPHERE, tuple(p)) for p in points[8:]),
        )
        f = random_coefficients(Manifold.S2, 20.0, np.random.default_rng(6))
        spline = interpolate_function(f, functionals, 3.0)

        assert np.allclose(functional_values(functionals, spline.coefficients), spline.values, atol=1e-9)

    def test_gram_is_symmetric(self, icosahedron):
        """Test the symmetry of the Gram matrix."""
        spline = solve_spline(icosahedron, np.ones(12), 3.0)

        assert np.allclose(spline.gram, spline.gram.T)
        assert spline.gram.shape == (12, 12)

    def test_gram_diagonal_of_point_evaluations(self, icosahedron):
        """Test the diagonal against the addition theorem series."""
        gram = assemble_gram(icosahedron, 2.0, 40)
        k = np.arange(41)
        expected = np.sum((2 * k + 1) * (1.0 + k * (k + 1.0)) ** -2.0)

        assert np.allclose(np.diag(gram), expected, rtol=1e-12)
        assert np.linalg.eigvalsh(gram).min() > 0.0

    def test_gram_threads_agree(self, symmetric_lattice):
        """Test that row-parallel assembly matches the serial result."""
        functionals = _point_set(symmetric_lattice.points)
        serial = assemble_gram(functionals, 2.0, 24)
        parallel = assemble_gram(functionals, 2.0, 24, threads=3)

        assert np.allclose(serial, parallel, rtol=0.0, atol=1e-14)

    def test_value_count_mismatch(self, icosahedron):
        """Test that values must match the functionals one to one."""
        with pytest.raises(PreconditionError):
            solve_spline(icosahedron, np.ones(11), 3.0)

    def test_small_smoothness(self, icosahedron):
        """Test that t <= 1 on S2 is refused."""
        with pytest.raises(PreconditionError, match="too small"):
            solve_spline(icosahedron, np.ones(12), 1.0)

    def test_indefinite_gram(self):
        """Test that a non positive definite system is reported."""
        with pytest.raises(SplineSolveError) as excinfo:
            _cholesky_solve(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2))

        assert excinfo.value.smallest_eigenvalue == pytest.approx(-1.0)

    def test_optimality(self, icosahedron):
        """Test that the spline is minimal and central among interpolants."""
        f = random_coefficients(Manifold.S2, 12.0, np.random.default_rng(7))
        spline = interpolate_function(f, icosahedron, 4.0)
        report = optimality_check(spline, f, trials=40, seed=7)

        assert report.passed
        assert report.trials == 40
        assert report.minimality_violations == 0

    @pytest.mark.slow
    def test_error_decays_with_mesh(self):
        """Test the rate at which point splines of a bandlimited function converge."""
        f = random_coefficients(Manifold.S2, 6.0, np.random.default_rng(13))
        rhos = np.array([0.8, 0.4, 0.2])
        errors = []
        for rho in rhos:
            lattice = generate_lattice(Manifold.S2, float(rho), seed=0)
            spline = interpolate_function(f, _point_set(lattice.points), 3.5)
            errors.append(_relative_error(spline.coefficients, f))
        slope = np.polyfit(np.log(rhos), np.log(errors), 1)[0]

        assert errors[1] < errors[0]
        assert errors[2] < errors[1]
        assert slope >= 3.5

    def test_optimality_without_trials(self, icosahedron):
        """Test that zero trials yield an empty, passing report."""
        f = random_coefficients(Manifold.S2, 6.0, np.random.default_rng(8))
        spline = interpolate_function(f, icosahedron, 4.0)

        assert optimality_check(spline, f, trials=0).passed


class TestSplineInversion:
    """Test suite for spline-based transform inversion."""

    def test_funk_radon(self, symmetric_lattice):
        """Test that the inversion approximates an even bandlimited function."""
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(9)))["even"]
        values = transform_pointwise(TransformKind.FUNK_RADON, truth, symmetric_lattice.points)
        result = spline_inversion_funk_radon(symmetric_lattice.points, values, 1.5, 0, max_degree=64)

        assert all(k % 2 == 0 for k in result.blocks)
        assert _relative_error(result, truth) < 0.5

    def test_funk_radon_needs_symmetry(self):
        """Test that non-symmetric points are refused."""
        lattice = generate_lattice(Manifold.S2, 0.8, seed=0)
        points = lattice.points[lattice.points[:, 2] > 0.1]

        with pytest.raises(PreconditionError, match="symmetric"):
            spline_inversion_funk_radon(points, np.zeros(len(points)), 1.5, 0)

    def test_hemispherical(self, symmetric_lattice):
        """Test that the inversion approximates an odd bandlimited function."""
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(10)))["odd"]
        values = transform_pointwise(TransformKind.HEMISPHERICAL, truth, symmetric_lattice.points)
        result = spline_inversion_hemispherical(symmetric_lattice.points, values, 1, max_degree=64)

        assert all(k % 2 == 1 for k in result.blocks)
        assert _relative_error(result, truth) < 0.5

    def test_funk_radon_improves_with_level(self):
        """Test that every refinement level lowers the inversion error."""
        axes = icosahedral_lattice().points
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(12)))["even"]
        values = transform_pointwise(TransformKind.FUNK_RADON, truth, axes)
        errors = [_relative_error(spline_inversion_funk_radon(axes, values, 0.0, level), truth) for level in (0, 1, 2)]

        assert errors[1] < errors[0]
        assert errors[2] < errors[1]

    def test_so3(self):
        """Test the SO(3) inversion from samples on a product lattice."""
        ico = icosahedral_lattice()
        lattice = product_lattice(ico, ico)
        truth = random_coefficients(Manifold.SO3, 2.0, np.random.default_rng(11))
        image = forward(TransformKind.SO3_RADON, truth)
        values = synthesize(image, lattice.points)
        result = spline_inversion_so3(lattice.points, values, 0.0, 1, max_degree=6)

        assert result.manifold == Manifold.SO3
        assert _relative_error(result, truth) < 0.5
