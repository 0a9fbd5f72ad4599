"""Unit tests for positive-weight cubature and discrete inversion."""

import numpy as np
import pytest

from mradon.core.discretize import (
    compute_cubature,
    discrete_fourier,
    discrete_invert_funk_radon,
    discrete_invert_so3,
    moment_residuals,
    product_bandwidth,
    product_cubature as combine_cubatures,
)
from mradon.core.geometry import generate_lattice, icosahedral_lattice, product_lattice
from mradon.core.spaces import max_abs_difference, parity_parts, random_coefficients, synthesize
from mradon.core.transforms import forward, transform_pointwise
from mradon.errors import PreconditionError
from mradon.models import HarmonicCoefficients, Manifold, TransformKind, degree_eigenvalue


@pytest.fixture(scope="module")
def sphere_cubature():
    """Cubature exact to degree 4 on a certified S2 lattice."""
    lattice = generate_lattice(Manifold.S2, 0.35, seed=0)
    return compute_cubature(lattice, degree_eigenvalue(4))


@pytest.fixture(scope="module")
def product_cubature():
    """Product cubature on two icosahedra, exact to degree 2 per factor."""
    ico = icosahedral_lattice()
    return compute_cubature(product_lattice(ico, ico), 6.0, density_constant=4.0)


@pytest.fixture(scope="module")
def fine_product_cubature():
    """Product cubature exact to degree 4 per factor."""
    factor = compute_cubature(generate_lattice(Manifold.S2, 0.5, seed=1), degree_eigenvalue(4))
    return combine_cubatures(factor, factor)


class TestProductBandwidth:
    """Test suite for bandwidths of products."""

    def test_degrees_add(self):
        """Test that degree 2 times degree 2 lands in degree 4."""
        assert product_bandwidth(6.0, 6.0) == degree_eigenvalue(4)

    def test_constants(self):
        """Test that constants do not raise the degree."""
        assert product_bandwidth(0.0, 2.0) == 2.0


class TestCubature:
    """Test suite for cubature weights."""

    def test_positive_unit_mass(self, sphere_cubature):
        """Test that weights are positive and sum to one."""
        assert np.all(sphere_cubature.weights > 0)
        assert float(np.sum(sphere_cubature.weights)) == pytest.approx(1.0, abs=1e-10)

    def test_moments_vanish(self, sphere_cubature):
        """Test that moments up to the exactness bandwidth are exact."""
        residual, violation = moment_residuals(sphere_cubature)

        assert residual <= 1e-10
        if violation is not None:
            assert violation[0][0] > 4

    def test_weights_are_read_only(self, sphere_cubature):
        """Test that cubature weights cannot be modified in place."""
        with pytest.raises(ValueError):
            sphere_cubature.weights[0] = 1.0

    def test_too_sparse(self):
        """Test the density precondition."""
        lattice = generate_lattice(Manifold.S2, 0.8, seed=0)

        with pytest.raises(PreconditionError, match="too sparse"):
            compute_cubature(lattice, 42.0)

    def test_negative_bandwidth(self, sphere_cubature):
        """Test that a negative exactness bandwidth is refused."""
        with pytest.raises(PreconditionError):
            compute_cubature(sphere_cubature.lattice, -1.0)

    @pytest.mark.parametrize("omega", [6.0, 12.0, 20.0])
    def test_weights_scale_like_inverse_bandwidth(self, omega):
        """Test that mu * omega stays in one bracket when rho * sqrt(omega) is fixed."""
        lattice = generate_lattice(Manifold.S2, 2.0 / np.sqrt(omega), seed=0)
        cubature = compute_cubature(lattice, omega)
        scaled = cubature.weights * omega

        assert scaled.min() >= 2e-4
        assert scaled.max() <= 1.0
        assert moment_residuals(cubature)[0] <= 1e-10

    def test_product_weights_multiply(self, product_cubature):
        """Test that product cubatures carry the outer product of the factor weights."""
        assert product_cubature.manifold == Manifold.S2XS2
        assert product_cubature.weights.size == 144
        assert float(np.sum(product_cubature.weights)) == pytest.approx(1.0, abs=1e-10)
        residual, _ = moment_residuals(product_cubature, extra_degrees=1)
        assert residual <= 1e-10


class TestDiscreteFourier:
    """Test suite for discrete Fourier analysis."""

    def test_recovers_bandlimited(self, sphere_cubature):
        """Test exact analysis of E_6 from node samples."""
        truth = random_coefficients(Manifold.S2, 6.0, np.random.default_rng(1))
        samples = synthesize(truth, sphere_cubature.lattice.points)

        assert max_abs_difference(discrete_fourier(samples, sphere_cubature, 6.0), truth) < 1e-8

    def test_needs_exactness(self, sphere_cubature):
        """Test that analysis beyond half the exactness is refused."""
        with pytest.raises(PreconditionError):
            discrete_fourier(np.zeros(sphere_cubature.lattice.size), sphere_cubature, 12.0)


class TestDiscreteInversion:
    """Test suite for the discrete inversion formulas."""

    def test_funk_radon_exact(self, sphere_cubature):
        """Test that even bandlimited functions are recovered from Rf samples."""
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(2)))["even"]
        samples = transform_pointwise(TransformKind.FUNK_RADON, truth, sphere_cubature.lattice.points)
        result = discrete_invert_funk_radon(samples, sphere_cubature, 6.0)

        assert max_abs_difference(result.coefficients, truth) < 1e-8
        assert result.odd_residual < 1e-9
        assert not result.vanishing_data

    def test_funk_radon_odd_function(self, sphere_cubature):
        """Test that odd inputs produce vanishing data."""
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(3)))["odd"]
        samples = transform_pointwise(TransformKind.FUNK_RADON, truth, sphere_cubature.lattice.points)
        result = discrete_invert_funk_radon(samples, sphere_cubature, 6.0)

        assert result.vanishing_data

    def test_funk_radon_reports_odd_content(self, sphere_cubature):
        """Test that odd content of the data is reported and discarded."""
        data = random_coefficients(Manifold.S2, 6.0, np.random.default_rng(4), degrees=[1])
        samples = synthesize(data, sphere_cubature.lattice.points)
        result = discrete_invert_funk_radon(samples, sphere_cubature, 6.0)

        assert result.odd_residual > 1e-3
        assert all(k % 2 == 0 for k in result.coefficients.blocks)

    def test_funk_radon_needs_sphere(self, product_cubature):
        """Test that a product cubature is refused."""
        with pytest.raises(PreconditionError, match="S2 cubature"):
            discrete_invert_funk_radon(np.zeros(144), product_cubature, 2.0)

    def test_so3_exact(self, product_cubature):
        """Test that SO(3) functions of degree 1 are recovered from their Radon transform."""
        truth = random_coefficients(Manifold.SO3, 2.0, np.random.default_rng(5))
        image = forward(TransformKind.SO3_RADON, truth)
        samples = synthesize(image, product_cubature.lattice.points)

        assert max_abs_difference(discrete_invert_so3(samples, product_cubature, 2.0), truth) < 1e-8

    @pytest.mark.slow
    def test_so3_exact_on_every_basis_function(self, fine_product_cubature):
        """Test exact recovery of each T_k^{ij} with k(k+1) <= 6."""
        for k in range(3):
            for i in range(1, 2 * k + 2):
                for j in range(1, 2 * k + 2):
                    truth = HarmonicCoefficients.from_entries(Manifold.SO3, 6.0, {(k, i, j): 1.0})
                    image = forward(TransformKind.SO3_RADON, truth)
                    samples = synthesize(image, fine_product_cubature.lattice.points)
                    result = discrete_invert_so3(samples, fine_product_cubature, 6.0)

                    assert max_abs_difference(result, truth) < 1e-8

    def test_so3_needs_exactness(self, product_cubature):
        """Test that too high a bandwidth is refused."""
        with pytest.raises(PreconditionError, match="per-factor exactness"):
            discrete_invert_so3(np.zeros(144), product_cubature, 6.0)

    def test_so3_needs_product_space(self, sphere_cubature):
        """Test that an S2 cubature is refused."""
        with pytest.raises(PreconditionError, match="S2xS2 cubature"):
            discrete_invert_so3(np.zeros(sphere_cubature.lattice.size), sphere_cubature, 2.0)
