"""Unit tests for lattices, certificates and Voronoi partitions."""

import math

import numpy as np
import pytest

from mradon.core.geometry import (
    dual_circles,
    generate_lattice,
    geodesic_distance,
    icosahedral_lattice,
    lattice_from_points,
    product_lattice,
    verify_lattice,
    voronoi_partition,
)
from mradon.errors import PreconditionError
from mradon.models import Manifold
from mradon.rotations import rot_z


@pytest.fixture(scope="module")
def sphere_lattice():
    """Certified S2 lattice shared by the module."""
    return generate_lattice(Manifold.S2, 0.4, seed=1)


class TestDistances:
    """Test suite for geodesic distances."""

    def test_sphere_distance(self):
        """Test that orthogonal unit vectors are pi/2 apart."""
        d = geodesic_distance(Manifold.S2, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))

        assert float(d) == pytest.approx(math.pi / 2)

    def test_product_distance(self):
        """Test the Euclidean combination of factor distances on S2xS2."""
        a = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        b = np.array([0.0, 1.0, 0.0, 0.0, 0.0, -1.0])

        d = geodesic_distance(Manifold.S2XS2, a, b)

        assert float(d) == pytest.approx(math.hypot(math.pi / 2, math.pi))

    def test_rotation_distance(self):
        """Test that the distance on SO(3) is the relative rotation angle."""
        d = geodesic_distance(Manifold.SO3, rot_z(0.2), rot_z(1.0))

        assert float(d) == pytest.approx(0.8)


class TestLatticeGeneration:
    """Test suite for certified lattice generation."""

    def test_sphere_lattice_is_certified(self, sphere_lattice):
        """Test separation and covering at rho = 0.4."""
        certificate = sphere_lattice.certificate

        assert sphere_lattice.certified
        assert certificate.min_distance >= 0.2 - 1e-12
        assert certificate.covering_radius <= 0.2 + 1e-12

    def test_cardinality_bracket(self, sphere_lattice):
        """Test |M| rho^2 within the ball-counting bracket."""
        assert 14.0 <= sphere_lattice.size * 0.4**2 <= 65.0

    def test_same_seed_same_points(self, sphere_lattice):
        """Test determinism of generation."""
        again = generate_lattice(Manifold.S2, 0.4, seed=1)

        assert np.array_equal(again.points, sphere_lattice.points)

    def test_symmetric_lattice_is_antipodal(self):
        """Test that a symmetric lattice holds every antipode."""
        lattice = generate_lattice(Manifold.S2, 0.5, symmetric=True, seed=2)
        points = lattice.points

        distances = np.min(np.linalg.norm(points[:, None, :] + points[None, :, :], axis=2), axis=1)

        assert lattice.symmetric and lattice.certified
        assert np.max(distances) < 1e-12
        assert len(dual_circles(lattice)) == lattice.size // 2

    def test_rotation_lattice(self):
        """Test a coarse certified lattice on SO(3)."""
        lattice = generate_lattice(Manifold.SO3, 1.2, seed=0)

        assert lattice.certified
        assert lattice.points.shape[1:] == (3, 3)

    def test_rho_too_small(self):
        """Test that tiny mesh parameters are refused."""
        with pytest.raises(PreconditionError, match="rho"):
            generate_lattice(Manifold.S2, 1e-6)

    def test_symmetric_off_sphere(self):
        """Test that symmetry is refused on SO(3)."""
        with pytest.raises(PreconditionError):
            generate_lattice(Manifold.SO3, 1.0, symmetric=True)


class TestExplicitLattices:
    """Test suite for lattices built from given points."""

    def test_icosahedron(self):
        """Test the 12-vertex symmetric lattice and its separation."""
        lattice = icosahedral_lattice()

        assert lattice.size == 12
        assert lattice.symmetric and lattice.certified
        assert lattice.certificate.min_distance == pytest.approx(math.atan(2.0))

    def test_missing_antipode_rejected(self):
        """Test that a symmetric flag needs antipodal pairs."""
        points = np.eye(3)

        with pytest.raises(PreconditionError, match="antipodes"):
            lattice_from_points(Manifold.S2, points, 1.0, symmetric=True)

    def test_uncertified_points_are_reported(self):
        """Test that a sparse set fails to certify a small rho."""
        lattice = lattice_from_points(Manifold.S2, np.vstack([np.eye(3), -np.eye(3)]), 0.5)

        assert not lattice.certified

    def test_product_lattice_certificate(self):
        """Test the factor-wise certificate of a product lattice."""
        first = icosahedral_lattice()
        second = lattice_from_points(Manifold.S2, np.vstack([np.eye(3), -np.eye(3)]), 2.0)

        product = product_lattice(first, second)

        assert product.size == 72
        assert product.factors is not None
        assert product.certificate.covering_radius == pytest.approx(
            math.hypot(first.certificate.covering_radius, second.certificate.covering_radius)
        )
        assert product.rho == pytest.approx(2.0 * product.certificate.covering_radius)

    def test_product_min_distance_is_attained(self):
        """Test that the factor-wise minimum distance matches the pairwise one."""
        first = icosahedral_lattice()
        second = lattice_from_points(Manifold.S2, np.vstack([np.eye(3), -np.eye(3)]), 2.0)

        product = product_lattice(first, second)
        fresh = verify_lattice(product, first.certificate.grid_density)

        assert product.certificate.min_distance == pytest.approx(
            min(first.certificate.min_distance, second.certificate.min_distance)
        )
        assert fresh.min_distance == pytest.approx(product.certificate.min_distance)
        assert product.certificate.min_distance / product.rho < min(
            first.certificate.min_distance / first.rho, second.certificate.min_distance / second.rho
        )

    def test_verify_lattice_recomputes(self, sphere_lattice):
        """Test that verification reproduces the stored certificate."""
        fresh = verify_lattice(sphere_lattice, sphere_lattice.certificate.grid_density)

        assert fresh.min_distance == pytest.approx(sphere_lattice.certificate.min_distance)
        assert fresh.covering_radius == pytest.approx(sphere_lattice.certificate.covering_radius)


class TestVoronoiPartition:
    """Test suite for nearest-point cell assignment."""

    def test_masses_partition_the_sphere(self, sphere_lattice):
        """Test that every point owns a cell and the masses sum to one."""
        partition = voronoi_partition(sphere_lattice)

        assert partition.masses.shape == (sphere_lattice.size,)
        assert np.all(partition.masses > 0)
        assert float(np.sum(partition.masses)) == pytest.approx(1.0)
        assert partition.owners.shape == partition.grid_weights.shape
