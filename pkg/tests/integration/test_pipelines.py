"""Integration tests chaining several mradon commands through files.

Each test builds its inputs with the command line where a command exists
and with the library otherwise, then checks the final file against a known
function.
"""

import csv

import numpy as np
import pytest
from click.testing import CliRunner

from mradon.cli import main
from mradon.core.spaces import l2_norm, max_abs_difference, parity_parts, random_coefficients
from mradon.core.transforms import transform_pointwise
from mradon.models import Cubature, HarmonicCoefficients, Lattice, Manifold, SampleSet, TransformKind
from mradon.parsers import FormatService


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def no_thread_env(monkeypatch):
    monkeypatch.delenv("MR_THREADS", raising=False)


def _invoke(runner, args):
    result = runner.invoke(main, [str(arg) for arg in args], obj={})
    assert result.exit_code == 0, result.output
    return result


def _write_radon_samples(formats, kind, truth, points, path):
    values = transform_pointwise(kind, truth, points)
    formats.save(SampleSet(manifold=Manifold.S2, points=points, values=values), path)


@pytest.mark.slow
class TestDiscreteInversionPipeline:
    """Lattice, cubature and discrete Funk-Radon inversion."""

    def test_recovers_even_function(self, runner, tmp_path):
        """Test that an even function in E_6 comes back from Rf at the nodes."""
        formats = FormatService()
        lattice_path, cubature_path = tmp_path / "s2.mrlat", tmp_path / "s2.mrcub"
        samples_path, truth_path = tmp_path / "rf.mrsmp", tmp_path / "f.mrcoef"
        out, table = tmp_path / "f_rec.mrcoef", tmp_path / "inversion.tsv"

        _invoke(runner, ["--seed", 0, "lattice", "--manifold", "S2", "--rho", 0.35, "--out", lattice_path])
        _invoke(runner, ["cubature", "--lattice", lattice_path, "--omega", 20, "--out", cubature_path])
        nodes = formats.load_as(cubature_path, Cubature).lattice.points
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(11)))["even"]
        formats.save(truth, truth_path)
        _write_radon_samples(formats, TransformKind.FUNK_RADON, truth, nodes, samples_path)

        _invoke(
            runner,
            [
                "invert", "--method", "discrete", "--transform", "funk",
                "--samples", samples_path, "--cubature", cubature_path, "--omega", 6,
                "--truth", truth_path, "--table", table, "--out", out,
            ],
        )

        assert max_abs_difference(formats.load_as(out, HarmonicCoefficients), truth) < 1e-8
        rows = dict(csv.reader(table.read_text(encoding="utf-8").splitlines()[1:], delimiter="\t"))
        assert float(rows["l2_error"]) < 1e-8
        assert rows["vanishing_data"] == "false"

    def test_samples_off_the_nodes(self, runner, tmp_path):
        """Test that samples away from the cubature nodes exit with 3."""
        formats = FormatService()
        lattice_path, cubature_path = tmp_path / "s2.mrlat", tmp_path / "s2.mrcub"
        samples_path = tmp_path / "rf.mrsmp"

        _invoke(runner, ["lattice", "--manifold", "S2", "--rho", 0.6, "--out", lattice_path])
        _invoke(runner, ["cubature", "--lattice", lattice_path, "--omega", 6, "--out", cubature_path])
        nodes = formats.load_as(lattice_path, Lattice).points
        shifted = np.roll(nodes, 1, axis=0)
        formats.save(SampleSet(manifold=Manifold.S2, points=shifted, values=np.zeros(len(shifted))), samples_path)

        result = runner.invoke(
            main,
            [
                "invert", "--method", "discrete", "--transform", "funk", "--samples", str(samples_path),
                "--cubature", str(cubature_path), "--omega", "2", "--out", str(tmp_path / "x"),
            ],
            obj={},
        )

        assert result.exit_code == 3
        assert "cubature nodes" in result.output


@pytest.mark.slow
class TestSplineInversionPipeline:
    """Spline inversion over several refinement levels."""

    def test_levels_table(self, runner, tmp_path):
        """Test that every level gets a row with its error."""
        formats = FormatService()
        config = tmp_path / "mradon.conf"
        config.write_text("max_degree = 64\n")
        lattice_path, samples_path = tmp_path / "sym.mrlat", tmp_path / "rf.mrsmp"
        truth_path, table = tmp_path / "f.mrcoef", tmp_path / "levels.tsv"

        _invoke(
            runner,
            ["lattice", "--manifold", "S2", "--rho", 0.4, "--symmetric", "--seed", 2, "--out", lattice_path],
        )
        truth = parity_parts(random_coefficients(Manifold.S2, 6.0, np.random.default_rng(12)))["even"]
        formats.save(truth, truth_path)
        points = formats.load_as(lattice_path, Lattice).points
        _write_radon_samples(formats, TransformKind.FUNK_RADON, truth, points, samples_path)

        _invoke(
            runner,
            [
                "--config", config, "invert", "--method", "spline", "--transform", "funk",
                "--samples", samples_path, "--t", 1.5, "--levels", "0,1",
                "--truth", truth_path, "--table", table, "--out", tmp_path / "f_rec.mrcoef",
            ],
        )

        lines = table.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "level\tl2_error\tl2_norm"
        levels = [line.split("\t") for line in lines[1:]]
        assert [row[0] for row in levels] == ["0", "1"]
        assert all(0.0 <= float(row[1]) < l2_norm(truth) for row in levels)
        recovered = formats.load_as(tmp_path / "f_rec.mrcoef", HarmonicCoefficients)
        assert all(k % 2 == 0 for k in recovered.blocks)

    def test_symmetric_points_required(self, runner, tmp_path):
        """Test that Funk-Radon splines on an unsymmetric set exit with 3."""
        formats = FormatService()
        lattice_path, samples_path = tmp_path / "s2.mrlat", tmp_path / "rf.mrsmp"

        _invoke(runner, ["lattice", "--manifold", "S2", "--rho", 0.6, "--out", lattice_path])
        points = formats.load_as(lattice_path, Lattice).points
        formats.save(SampleSet(manifold=Manifold.S2, points=points, values=np.ones(len(points))), samples_path)

        result = runner.invoke(
            main,
            [
                "invert", "--method", "spline", "--transform", "funk", "--samples", str(samples_path),
                "--t", "1.5", "--out", str(tmp_path / "x"),
            ],
            obj={},
        )

        assert result.exit_code == 3
        assert "antipodally symmetric" in result.output


class TestFramePipeline:
    """Frame build, analysis and synthesis through files."""

    def test_analysis_synthesis_round_trip(self, runner, tmp_path):
        """Test that synthesis of the written frame coefficients restores f."""
        formats = FormatService()
        frame_dir = tmp_path / "frame"
        source, coefficients, back = tmp_path / "f.mrcoef", tmp_path / "frame.tsv", tmp_path / "f2.mrcoef"
        f = random_coefficients(Manifold.S2, 4.0, np.random.default_rng(13))
        formats.save(f, source)

        _invoke(runner, ["--seed", 0, "frame", "build", "--jmax", 1, "--out-dir", frame_dir])
        manifest = frame_dir / "frame.mrfrm"
        assert manifest.exists()
        assert (frame_dir / "frame.mrfrm.manifest.json").exists()
        _invoke(runner, ["frame", "analyze", "--manifest", manifest, "--in", source, "--out", coefficients])
        _invoke(runner, ["frame", "synthesize", "--manifest", manifest, "--in", coefficients, "--out", back])

        assert coefficients.read_text(encoding="utf-8").startswith("level\tatom\tvalue")
        assert max_abs_difference(formats.load_as(back, HarmonicCoefficients), f) < 1e-10

    def test_profile_table(self, runner, tmp_path):
        """Test that a profile table has one row per sampled distance."""
        frame_dir, profile = tmp_path / "frame", tmp_path / "profile.tsv"

        _invoke(runner, ["frame", "build", "--jmax", 1, "--out-dir", frame_dir])
        _invoke(
            runner,
            ["frame", "profile", "--manifest", frame_dir / "frame.mrfrm", "--level", 1, "--out", profile],
        )

        lines = profile.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "distance\tabs_value"
        assert len(lines) == 362

    def test_bad_coefficient_table(self, runner, tmp_path):
        """Test that a malformed coefficient table exits with 3."""
        frame_dir, table = tmp_path / "frame", tmp_path / "bad.tsv"
        table.write_text("level\tatom\tvalue\n0\t-1\t1.0\n", encoding="utf-8")

        _invoke(runner, ["frame", "build", "--jmax", 1, "--out-dir", frame_dir])
        result = runner.invoke(
            main,
            [
                "frame", "synthesize", "--manifest", str(frame_dir / "frame.mrfrm"),
                "--in", str(table), "--out", str(tmp_path / "x"),
            ],
            obj={},
        )

        assert result.exit_code == 3
