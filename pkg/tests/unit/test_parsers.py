"""Unit tests for the MR* file formats."""

import numpy as np
import pytest

from mradon.core.discretize import compute_cubature
from mradon.core.frames import build_frame
from mradon.core.geometry import icosahedral_lattice
from mradon.errors import FormatError
from mradon.models import (
    Cubature,
    FunctionalKind,
    HarmonicCoefficients,
    Lattice,
    Manifold,
    SampleSet,
    SplineProblem,
)
from mradon.parsers import (
    CoefficientFormat,
    CubatureFormat,
    FormatRegistry,
    FormatService,
    FrameManifestFormat,
    LatticeFormat,
    ParsingUtilities,
    SampleFormat,
    SplineProblemFormat,
)
from mradon.rotations import euler_to_matrix


class TestParsingUtilities:
    """Tests for the shared header helpers."""

    def test_parse_header(self):
        """Test that header fields are split into a dict."""
        fields = ParsingUtilities.parse_header("MRLAT v1 manifold=S2 rho=0.5", "MRLAT")

        assert fields == {"manifold": "S2", "rho": "0.5"}

    def test_wrong_magic(self):
        """Test that a foreign header is rejected on line 1."""
        with pytest.raises(FormatError) as excinfo:
            ParsingUtilities.parse_header("MRCUB v1 manifold=S2", "MRLAT")

        assert excinfo.value.line_number == 1

    def test_wrong_version(self):
        """Test that unknown versions are rejected."""
        with pytest.raises(FormatError, match="version"):
            ParsingUtilities.parse_header("MRLAT v2 manifold=S2", "MRLAT")

    def test_parse_bool(self):
        """Test the accepted boolean spellings."""
        assert ParsingUtilities.parse_bool("true")
        assert not ParsingUtilities.parse_bool("0")
        with pytest.raises(FormatError):
            ParsingUtilities.parse_bool("maybe")

    def test_is_empty_line(self):
        """Test that blank and comment lines are skipped."""
        assert ParsingUtilities.is_empty_line("   ")
        assert ParsingUtilities.is_empty_line("# note")
        assert not ParsingUtilities.is_empty_line("0 1 0.5")


class TestCoefficientFormat:
    """Tests for MRCOEF files."""

    def test_parse_sphere(self, tmp_path):
        """Test reading sparse S2 coefficients."""
        path = tmp_path / "f.mrcoef"
        path.write_text("MRCOEF v1 manifold=S2 omega=6\n# two entries\n0 1 0.5\n2 3 -1.25\n")

        c = CoefficientFormat().parse(path)

        assert c.manifold == Manifold.S2
        assert c.omega == 6.0
        assert c.value(0, 1) == 0.5
        assert c.value(2, 3) == -1.25
        assert c.value(2, 1) == 0.0

    def test_product_shorthand(self, tmp_path):
        """Test that three indices on S2xS2 name an equal-degree pair."""
        path = tmp_path / "g.mrcoef"
        path.write_text("MRCOEF v1 manifold=S2xS2 omega=4\n1 2 3 0.75\n0 1 1 1 2.0\n")

        c = CoefficientFormat().parse(path)

        assert c.value(1, 1, 2, 3) == 0.75
        assert c.value(0, 1, 1, 1) == 2.0

    def test_duplicate_index(self, tmp_path):
        """Test that repeated indices are reported with their line."""
        path = tmp_path / "f.mrcoef"
        path.write_text("MRCOEF v1 manifold=S2 omega=2\n1 1 0.5\n1 1 0.25\n")

        with pytest.raises(FormatError, match="Duplicate") as excinfo:
            CoefficientFormat().parse(path)

        assert excinfo.value.line_number == 3

    def test_degree_beyond_bandwidth(self, tmp_path):
        """Test that entries above omega are rejected."""
        path = tmp_path / "f.mrcoef"
        path.write_text("MRCOEF v1 manifold=S2 omega=2\n3 1 1.0\n")

        with pytest.raises(FormatError, match="bandwidth"):
            CoefficientFormat().parse(path)

    def test_wrong_index_count(self, tmp_path):
        """Test that SO(3) entries need three indices."""
        path = tmp_path / "f.mrcoef"
        path.write_text("MRCOEF v1 manifold=SO3 omega=2\n1 1 1.0\n")

        with pytest.raises(FormatError, match="Wrong number of indices"):
            CoefficientFormat().parse(path)

    def test_dump_keeps_values(self, tmp_path):
        """Test that written coefficients read back exactly."""
        c = HarmonicCoefficients.from_entries(Manifold.SO3, 2.0, {(0, 1, 1): 1.0 / 3.0, (1, 2, 3): -0.1})
        path = tmp_path / "out.mrcoef"

        CoefficientFormat().dump(c, path)
        back = CoefficientFormat().parse(path)

        assert back.value(0, 1, 1) == 1.0 / 3.0
        assert back.value(1, 2, 3) == -0.1


class TestLatticeFormat:
    """Tests for MRLAT files."""

    def test_dump_and_parse(self, tmp_path):
        """Test that points and certificate survive a file."""
        lattice = icosahedral_lattice()
        path = tmp_path / "ico.mrlat"

        LatticeFormat().dump(lattice, path)
        back = LatticeFormat().parse(path)

        assert back.size == 12
        assert back.symmetric
        assert np.array_equal(back.points, lattice.points)
        assert back.certificate.min_distance == lattice.certificate.min_distance

    def test_missing_certificate_is_recomputed(self, tmp_path):
        """Test that a bare point list gets a fresh certificate."""
        path = tmp_path / "pair.mrlat"
        path.write_text("MRLAT v1 manifold=S2 rho=3.2\n0 0 1\n0 0 -1\n")

        lattice = LatticeFormat().parse(path)

        assert lattice.certificate.min_distance == pytest.approx(np.pi)

    def test_point_count_mismatch(self, tmp_path):
        """Test that the announced count must match."""
        path = tmp_path / "bad.mrlat"
        path.write_text("MRLAT v1 manifold=S2 rho=1 n=3\n0 0 1\n0 0 -1\n")

        with pytest.raises(FormatError, match="announces"):
            LatticeFormat().parse(path)

    def test_row_width(self, tmp_path):
        """Test that S2 rows need three coordinates."""
        path = tmp_path / "bad.mrlat"
        path.write_text("MRLAT v1 manifold=S2 rho=1\n0 0 1\n0 1\n")

        with pytest.raises(FormatError, match="Expected 3 values") as excinfo:
            LatticeFormat().parse(path)

        assert excinfo.value.line_number == 3

    def test_unknown_manifold(self, tmp_path):
        """Test that the manifold tag must be known."""
        path = tmp_path / "bad.mrlat"
        path.write_text("MRLAT v1 manifold=T3 rho=1\n")

        with pytest.raises(FormatError):
            LatticeFormat().parse(path)


class TestSampleFormat:
    """Tests for MRSMP files."""

    def test_rotation_samples(self, tmp_path):
        """Test that SO(3) samples are stored as Euler angles and read back as matrices."""
        rotations = euler_to_matrix(np.array([0.3, 1.0]), np.array([0.7, 2.0]), np.array([0.1, -1.5]))
        samples = SampleSet(Manifold.SO3, rotations, np.array([1.5, -2.0]))
        path = tmp_path / "s.mrsmp"

        SampleFormat().dump(samples, path)
        back = SampleFormat().parse(path)

        assert back.size == 2
        assert np.allclose(back.points, rotations, atol=1e-12)
        assert back.values.tolist() == [1.5, -2.0]

    def test_missing_value(self, tmp_path):
        """Test that every row carries a value."""
        path = tmp_path / "s.mrsmp"
        path.write_text("MRSMP v1 manifold=S2\n0 0 1\n")

        with pytest.raises(FormatError):
            SampleFormat().parse(path)


class TestCubatureFormat:
    """Tests for MRCUB files."""

    def test_dump_and_parse(self, tmp_path):
        """Test that weights and exactness survive a file."""
        cubature = compute_cubature(icosahedral_lattice(), 6.0, density_constant=4.0)
        path = tmp_path / "ico.mrcub"

        CubatureFormat().dump(cubature, path)
        back = CubatureFormat().parse(path)

        assert back.omega_exact == 6.0
        assert np.array_equal(back.weights, cubature.weights)
        assert back.lattice.size == 12

    def test_non_positive_weight(self, tmp_path):
        """Test that zero weights are rejected."""
        path = tmp_path / "bad.mrcub"
        path.write_text("MRCUB v1 omega=0 manifold=S2 rho=3.2\n0 0 1 0.5\n0 0 -1 0\n")

        with pytest.raises(FormatError, match="Non-positive weight"):
            CubatureFormat().parse(path)


class TestSplineProblemFormat:
    """Tests for MRSPL files."""

    def test_parse_mixed_kinds(self, tmp_path):
        """Test reading functionals of several kinds."""
        path = tmp_path / "p.mrspl"
        path.write_text(
            "MRSPL v1 manifold=S2 t=3\n"
            "point 0 0 1 1.0\n"
            "circle 1 0 0 0.5\n"
            "hemi 0 1 0 -0.25\n"
        )

        problem = SplineProblemFormat().parse(path)

        assert problem.t == 3.0
        assert [f.kind for f in problem.functionals] == [
            FunctionalKind.POINT,
            FunctionalKind.CIRCLE,
            FunctionalKind.HEMISPHERE,
        ]
        assert problem.values.tolist() == [1.0, 0.5, -0.25]

    def test_unknown_kind(self, tmp_path):
        """Test that unknown kinds are reported with their line."""
        path = tmp_path / "p.mrspl"
        path.write_text("MRSPL v1 manifold=S2 t=3\nline 0 0 1 1.0\n")

        with pytest.raises(FormatError, match="Unknown functional kind") as excinfo:
            SplineProblemFormat().parse(path)

        assert excinfo.value.line_number == 2

    def test_duplicate_functionals(self, tmp_path):
        """Test that duplicate functionals make the file invalid."""
        path = tmp_path / "p.mrspl"
        path.write_text("MRSPL v1 manifold=S2 t=3\ncircle 0 0 1 1.0\ncircle 0 0 -1 1.0\n")

        with pytest.raises(FormatError, match="Invalid functional set"):
            SplineProblemFormat().parse(path)

    def test_dump_and_parse(self, tmp_path):
        """Test that a problem survives a file."""
        path = tmp_path / "p.mrspl"
        path.write_text("MRSPL v1 manifold=S2xS2 t=4.5\npoint 0 0 1 1 0 0 2.0\n")
        problem = SplineProblemFormat().parse(path)
        copy = tmp_path / "copy.mrspl"

        SplineProblemFormat().dump(problem, copy)
        back = SplineProblemFormat().parse(copy)

        assert back.functionals.manifold == Manifold.S2XS2
        assert back.t == 4.5
        assert back.values.tolist() == [2.0]


class TestFrameManifestFormat:
    """Tests for MRFRM manifests."""

    def test_dump_and_parse(self, tmp_path):
        """Test that a frame is rebuilt from its manifest and level files."""
        fs = build_frame(1, seed=0)
        path = tmp_path / "frame" / "frame.mrfrm"

        FrameManifestFormat().dump(fs, path)
        back = FrameManifestFormat().parse(path)

        assert (tmp_path / "frame" / "level1.mrcub").exists()
        assert back.j_max == 1
        assert back.atom_count == fs.atom_count
        assert back.lattice_constant == fs.lattice_constant

    def test_missing_level(self, tmp_path):
        """Test that every level must be listed."""
        path = tmp_path / "frame.mrfrm"
        path.write_text("MRFRM v1 manifold=S2 Jmax=1 c=0.5\nlevel 0 lattice=a.mrlat cubature=a.mrcub\n")

        with pytest.raises(FormatError, match="levels 0..1"):
            FrameManifestFormat().parse(path)


class TestFormatRegistry:
    """Tests for FormatRegistry."""

    def test_selects_by_magic(self, tmp_path):
        """Test that the header magic word picks the format."""
        registry = FormatRegistry()
        registry.register_format(LatticeFormat())
        registry.register_format(SampleFormat())
        path = tmp_path / "any.txt"
        path.write_text("MRSMP v1 manifold=S2\n")

        assert isinstance(registry.get_format(path), SampleFormat)
        assert len(registry.get_all_formats()) == 2

    def test_unknown_magic(self, tmp_path):
        """Test that unrecognised files select no format."""
        registry = FormatRegistry()
        registry.register_format(LatticeFormat())
        path = tmp_path / "any.txt"
        path.write_text("hello\n")

        assert registry.get_format(path) is None


class TestFormatService:
    """Tests for FormatService."""

    def test_load_dispatches(self, tmp_path):
        """Test that loading returns the object named by the header."""
        path = tmp_path / "ico.mrlat"
        FormatService().save(icosahedral_lattice(), path)

        assert isinstance(FormatService().load(path), Lattice)
        assert isinstance(FormatService().load_as(path, Lattice), Lattice)

    def test_load_as_wrong_type(self, tmp_path):
        """Test that the expected type is enforced."""
        path = tmp_path / "ico.mrlat"
        FormatService().save(icosahedral_lattice(), path)

        with pytest.raises(FormatError, match="expected Cubature"):
            FormatService().load_as(path, Cubature)

    def test_missing_file(self, tmp_path):
        """Test that missing files raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            FormatService().load(tmp_path / "absent.mrlat")

    def test_unrecognised_header(self, tmp_path):
        """Test that foreign files are a format error."""
        path = tmp_path / "notes.txt"
        path.write_text("just some text\n")

        with pytest.raises(FormatError, match="No format"):
            FormatService().load(path)

    def test_error_names_the_file(self, tmp_path):
        """Test that parse errors are located in the file."""
        path = tmp_path / "bad.mrsmp"
        path.write_text("MRSMP v1 manifold=S2\n0 0 1\n")

        with pytest.raises(FormatError, match="bad.mrsmp"):
            FormatService().load(path)

    def test_save_unknown_type(self, tmp_path):
        """Test that only stored types can be saved."""
        with pytest.raises(TypeError):
            FormatService().save({"a": 1}, tmp_path / "x")

    def test_save_spline_problem(self, tmp_path):
        """Test that spline problems are written as MRSPL."""
        source = tmp_path / "p.mrspl"
        source.write_text("MRSPL v1 manifold=S2 t=3\npoint 0 0 1 1.0\n")
        problem = FormatService().load_as(source, SplineProblem)
        target = tmp_path / "q.mrspl"

        FormatService().save(problem, target)

        assert target.read_text().startswith("MRSPL v1")
