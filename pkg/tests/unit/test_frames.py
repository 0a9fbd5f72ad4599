"""Unit tests for the Parseval frame on S2."""

import numpy as np
import pytest

from mradon.core.discretize import compute_cubature
from mradon.core.frames import (
    atom_in_band,
    band_degree,
    build_filter_bank,
    build_frame,
    discrete_frame_representation,
    frame_analyze,
    frame_atom,
    frame_energy_defect,
    frame_from_cubatures,
    frame_synthesize,
    localization_profile,
    partition_residual,
    smooth_step,
)
from mradon.core.geometry import generate_lattice
from mradon.core.spaces import max_abs_difference, random_coefficients, synthesize
from mradon.errors import FrameBuildError, PreconditionError
from mradon.models import HarmonicCoefficients, Manifold


@pytest.fixture(scope="module")
def frame():
    """Two-level frame covering eigenvalues up to 4."""
    return build_frame(1, seed=0)


@pytest.fixture(scope="module")
def deep_frame():
    """Four-level frame covering eigenvalues up to 64."""
    return build_frame(3, seed=0)


class TestFilters:
    """Test suite for the Littlewood-Paley filters."""

    def test_smooth_step_ends(self):
        """Test that the cutoff is 1 up to 1 and 0 from 4 on."""
        s = np.array([0.0, 0.5, 1.0, 4.0, 7.0])

        assert smooth_step(s).tolist() == [1.0, 1.0, 1.0, 0.0, 0.0]

    def test_smooth_step_monotone(self):
        """Test that the cutoff never increases."""
        values = smooth_step(np.linspace(0.0, 5.0, 501))

        assert np.all(np.diff(values) <= 1e-15)

    def test_partition_of_unity(self):
        """Test that the squared filters add up to the rescaled cutoff."""
        bank = build_filter_bank(3)

        assert partition_residual(bank, np.linspace(0.0, 200.0, 4001)) < 1e-14

    def test_band_degrees(self):
        """Test the top degree of each level's band."""
        assert [band_degree(j) for j in range(4)] == [1, 3, 7, 15]

    def test_filter_bank_shape(self):
        """Test that filters are tabulated up to the finest band."""
        bank = build_filter_bank(2)

        assert bank.phi.shape == (3, 8)
        assert bank.k_max == 7

    def test_needs_a_level(self):
        """Test that J_max must be positive."""
        with pytest.raises(PreconditionError):
            build_filter_bank(0)


class TestFrame:
    """Test suite for frame analysis and synthesis."""

    def test_levels(self, frame):
        """Test the level layout of the frame."""
        assert [level.k_band for level in frame.levels] == [1, 3]
        assert frame.coverage == 4.0
        assert frame.atom_count == sum(level.cubature.lattice.size for level in frame.levels)

    def test_parseval_energy(self, frame):
        """Test that frame energy equals the L2 energy."""
        rng = np.random.default_rng(1)

        for _ in range(3):
            assert frame_energy_defect(random_coefficients(Manifold.S2, 4.0, rng), frame) < 1e-9

    def test_reconstruction(self, frame):
        """Test that synthesis inverts analysis on covered functions."""
        f = random_coefficients(Manifold.S2, 4.0, np.random.default_rng(2))
        coefficients = frame_analyze(f, frame)

        assert [c.size for c in coefficients] == [level.cubature.lattice.size for level in frame.levels]
        assert max_abs_difference(frame_synthesize(coefficients, frame), f) < 1e-10

    def test_zero_energy(self, frame):
        """Test that the zero function has no defect."""
        assert frame_energy_defect(HarmonicCoefficients.zeros(Manifold.S2, 4.0), frame) == 0.0

    def test_rejects_uncovered(self, frame):
        """Test that content beyond the coverage is refused."""
        f = random_coefficients(Manifold.S2, 12.0, np.random.default_rng(4), degrees=[3])

        with pytest.raises(PreconditionError, match="coverage"):
            frame_analyze(f, frame)

    def test_rejects_other_manifold(self, frame):
        """Test that frames only analyze S2 functions."""
        with pytest.raises(PreconditionError):
            frame_analyze(random_coefficients(Manifold.SO3, 2.0, np.random.default_rng(5)), frame)

    def test_synthesis_checks_lengths(self, frame):
        """Test that coefficient arrays must match the level sizes."""
        with pytest.raises(PreconditionError):
            frame_synthesize([np.zeros(3)], frame)
        with pytest.raises(PreconditionError):
            frame_synthesize([np.zeros(3), np.zeros(3)], frame)

    def test_atom_is_localized_at_centre(self, frame):
        """Test that an atom peaks at its own centre."""
        level = frame.levels[1]
        atom = frame_atom(frame, 1, 0)
        centre = level.centres[0]
        far = -centre

        assert abs(synthesize(atom, centre[None, :])[0]) > abs(synthesize(atom, far[None, :])[0])

    def test_atom_out_of_range(self, frame):
        """Test that unknown atoms are refused."""
        with pytest.raises(PreconditionError):
            frame_atom(frame, 0, frame.levels[0].cubature.lattice.size)
        with pytest.raises(PreconditionError):
            frame_atom(frame, 5, 0)

    def test_reassembly(self, frame):
        """Test that a frame rebuilt from its cubatures is the same frame."""
        rebuilt = frame_from_cubatures(
            frame.filter_bank, [level.cubature for level in frame.levels], frame.lattice_constant
        )
        f = random_coefficients(Manifold.S2, 4.0, np.random.default_rng(6))

        assert rebuilt.atom_count == frame.atom_count
        assert frame_energy_defect(f, rebuilt) < 1e-9

    def test_reassembly_level_count(self, frame):
        """Test that the cubature count must match the filter bank."""
        with pytest.raises(PreconditionError):
            frame_from_cubatures(frame.filter_bank, [frame.levels[0].cubature], frame.lattice_constant)

    def test_build_failure(self):
        """Test that an uncertifiable level is reported with its index."""
        with pytest.raises(FrameBuildError) as excinfo:
            build_frame(1, lattice_constant=3.0)

        assert excinfo.value.level == 0


class TestLocalization:
    """Test suite for atom localization profiles."""

    def test_profile_shape(self, frame):
        """Test the sampled distances and decay orders."""
        profile = localization_profile(frame, 1, 0)

        assert profile.distances.shape == (361,)
        assert profile.values.shape == (361,)
        assert sorted(profile.normalized_sup) == [2, 4, 6]

    def test_peak_at_zero_distance(self, frame):
        """Test that the zonal atom is largest at its centre."""
        profile = localization_profile(frame, 1, 0)

        assert profile.values[0] == pytest.approx(np.max(profile.values))

    def test_unknown_atom(self, frame):
        """Test that unknown atoms are refused."""
        with pytest.raises(PreconditionError):
            localization_profile(frame, 0, -1)


@pytest.mark.slow
class TestDeepFrame:
    """Test suite for a frame with four levels."""

    def test_parseval_energy(self, deep_frame):
        """Test that frame energy equals L2 energy up to the coverage."""
        rng = np.random.default_rng(21)

        for _ in range(10):
            f = random_coefficients(Manifold.S2, deep_frame.coverage, rng)
            assert frame_energy_defect(f, deep_frame) < 1e-9

    def test_atoms_stay_in_band(self, deep_frame):
        """Test that each atom only carries degrees of its own band."""
        for level in deep_frame.levels:
            for k in (0, level.cubature.lattice.size - 1):
                atom = frame_atom(deep_frame, level.j, k)
                assert atom.blocks
                assert atom_in_band(atom, level.j)

        assert not atom_in_band(frame_atom(deep_frame, 0, 0), 3)

    def test_weights_scale_with_level(self, deep_frame):
        """Test that b_{j,k} 4^j stays in one bracket on every level."""
        for level in deep_frame.levels:
            scaled = level.weights * 4.0**level.j
            assert scaled.min() >= 1e-5
            assert scaled.max() <= 0.2

    def test_localization_is_uniform_in_level(self, deep_frame):
        """Test that the normalized decay statistic stays bounded as j grows."""
        sups = [localization_profile(deep_frame, j, 0).normalized_sup[2] for j in (1, 2, 3)]

        assert all(1.0 <= s <= 25.0 for s in sups)


class TestDiscreteRepresentation:
    """Test suite for frame reconstruction from point samples."""

    def test_recovers_bandlimited(self, frame):
        """Test exact recovery of a covered function from master samples."""
        master = compute_cubature(generate_lattice(Manifold.S2, 0.35, seed=0), 20.0)
        f = random_coefficients(Manifold.S2, 2.0, np.random.default_rng(7))
        samples = synthesize(f, master.lattice.points)
        result = discrete_frame_representation(samples, master, frame, levels=1)

        assert max_abs_difference(result, f) < 1e-8

    def test_needs_exact_master(self, frame):
        """Test that the master cubature must be exact enough."""
        master = compute_cubature(generate_lattice(Manifold.S2, 0.5, seed=0), 6.0)

        with pytest.raises(PreconditionError, match="Master cubature"):
            discrete_frame_representation(np.zeros(master.lattice.size), master, frame, levels=1)

    def test_level_range(self, frame):
        """Test that levels beyond the frame are refused."""
        master = frame.levels[0].cubature

        with pytest.raises(PreconditionError):
            discrete_frame_representation(np.zeros(master.lattice.size), master, frame, levels=2)
