"""Orchestration of experiment commands: library calls plus plot-ready tables."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from ..core.discretize import (
    compute_cubature,
    discrete_fourier,
    discrete_invert_funk_radon,
    discrete_invert_so3,
    moment_residuals,
)
from ..core.frames import (
    build_frame,
    frame_analyze,
    frame_energy_defect,
    frame_synthesize,
    localization_profile,
)
from ..core.geometry import generate_lattice, lattice_from_points
from ..core.reconstruct import frame_algorithm, iterative_reconstruct, pp_frame_bounds
from ..core.spaces import (
    delta_projection,
    l2_norm,
    linear_combination,
    parity_parts,
    random_coefficients,
)
from ..core.splines import (
    functional_values,
    solve_spline,
    spline_inversion_funk_radon,
    spline_inversion_hemispherical,
    spline_inversion_so3,
)
from ..core.transforms import forward, hemispherical_inverse, inverse
from ..errors import FormatError, PreconditionError
from ..models import (
    Cubature,
    ExperimentConfig,
    FrameSystem,
    HarmonicCoefficients,
    IterationTrace,
    Lattice,
    Manifold,
    SampleSet,
    Spline,
    SplineProblem,
    TransformKind,
)
from ..parsers.format_service import FormatService
from ..reporters.reporter_service import ReportTable, format_number

logger = logging.getLogger(__name__)

_DATA_MANIFOLD = {
    TransformKind.FUNK_RADON: Manifold.S2,
    TransformKind.HEMISPHERICAL: Manifold.S2,
    TransformKind.SO3_RADON: Manifold.S2XS2,
}

# Riemannian volumes of the unit-radius manifolds
_VOLUME = {
    Manifold.S2: 4.0 * math.pi,
    Manifold.SO3: 8.0 * math.pi**2,
    Manifold.S2XS2: 16.0 * math.pi**2,
}


def _error(result: HarmonicCoefficients, truth: Optional[HarmonicCoefficients]) -> float:
    if truth is None:
        return math.nan
    return l2_norm(linear_combination(result, truth, 1.0, -1.0))


def invert_data(kind: TransformKind, data: HarmonicCoefficients) -> HarmonicCoefficients:
    """Invert reconstructed transform data, keeping only the part the transform can produce."""
    if kind == TransformKind.FUNK_RADON:
        return inverse(kind, parity_parts(data)["even"])
    if kind == TransformKind.HEMISPHERICAL:
        return hemispherical_inverse(parity_parts(data)["odd"])
    return inverse(kind, delta_projection(data))


class ExperimentService:
    """Runs the library operations behind each CLI command.

    Attributes:
        config: Effective experiment configuration
        formats: File format service used for auxiliary reads and writes
    """

    def __init__(self, config: ExperimentConfig, formats: Optional[FormatService] = None):
        self.config = config
        self.formats = formats or FormatService()

    @property
    def _spline_options(self) -> Dict[str, int]:
        return {
            "max_degree": self.config.max_degree,
            "wigner_max_degree": self.config.wigner_max_degree,
            "threads": self.config.threads,
        }

    def resolve_output(self, path: Path) -> Path:
        """Relative output paths live under the configured output directory."""
        return path if path.is_absolute() else self.config.output_directory / path

    def write_manifest(self, output: Path, command: str, parameters: Dict[str, Any]) -> Path:
        """Write ``<output>.manifest.json`` with every effective parameter.

        Returns:
            Path of the manifest
        """
        self.config.parameters = dict(parameters)
        manifest = self.config.to_manifest(command, __version__)
        path = output.with_name(output.name + ".manifest.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def sample_lattice(self, samples: SampleSet, rho: Optional[float] = None) -> Lattice:
        """Certified lattice on the sample points.

        Without an explicit rho the mesh parameter is twice the measured
        covering radius.
        """
        n = max(samples.size, 1)
        volume = _VOLUME[samples.manifold]
        guess = rho or (volume / n) ** (1.0 / samples.manifold.dimension)
        lattice = lattice_from_points(samples.manifold, samples.points, guess)
        if rho is not None:
            return lattice
        measured = 2.0 * lattice.certificate.covering_radius
        return Lattice(lattice.manifold, lattice.points, measured, lattice.symmetric, lattice.certificate)

    def create_lattice(self, manifold: Manifold, rho: float, symmetric: bool) -> Tuple[Lattice, ReportTable]:
        lattice = generate_lattice(manifold, rho, symmetric, self.config.seed, self.config.grid_factor)
        certificate = lattice.certificate
        table = ReportTable(title="Lattice certificate", columns=["quantity", "value"])
        table.add_row("manifold", manifold.value)
        table.add_row("points", lattice.size)
        table.add_row("rho", float(rho))
        table.add_row("min_distance", certificate.min_distance)
        table.add_row("covering_radius", certificate.covering_radius)
        table.add_row("size_times_rho_n", lattice.size * rho**manifold.dimension)
        table.add_row("certified", lattice.certified)
        return lattice, table

    def create_cubature(self, lattice: Lattice, omega: float) -> Tuple[Cubature, ReportTable]:
        cubature = compute_cubature(
            lattice, omega, self.config.density_constant, self.config.wigner_max_degree
        )
        inside, violation = moment_residuals(cubature, tol=self.config.tolerance("moment", 1e-10))
        n = lattice.manifold.dimension
        scale = max(omega, 1.0) ** (n / 2.0)
        table = ReportTable(title="Cubature", columns=["quantity", "value"])
        table.add_row("nodes", lattice.size)
        table.add_row("omega_exact", float(omega))
        table.add_row("max_moment_residual", inside)
        table.add_row("weight_sum", float(np.sum(cubature.weights)))
        table.add_row("min_weight_scaled", float(cubature.weights.min()) * scale)
        table.add_row("max_weight_scaled", float(cubature.weights.max()) * scale)
        if violation is not None:
            table.notes.append(f"first moment beyond exactness: {violation[0]} error {violation[1]:.3g}")
        return cubature, table

    def apply_transform(self, direction: str, kind: TransformKind, c: HarmonicCoefficients) -> HarmonicCoefficients:
        if direction == "forward":
            return forward(kind, c)
        return inverse(kind, c, self.config.tolerance("parity", 1e-12))

    def fit_spline(self, problem: SplineProblem, k_max: Optional[int] = None) -> Tuple[Spline, ReportTable]:
        options = self._spline_options
        if k_max is not None:
            options["max_degree"] = k_max
        spline = solve_spline(problem.functionals, problem.values, problem.t, **options)
        achieved = functional_values(problem.functionals, spline.coefficients)
        table = ReportTable(title="Spline", columns=["quantity", "value"])
        table.add_row("functionals", len(problem.functionals))
        table.add_row("t", float(problem.t))
        table.add_row("k_max", spline.k_max)
        table.add_row("interpolation_residual", float(np.max(np.abs(achieved - problem.values), initial=0.0)))
        return spline, table

    def invert(
        self,
        method: str,
        kind: TransformKind,
        samples: SampleSet,
        omega: float,
        t: float = 0.0,
        levels: Sequence[int] = (0,),
        cubature: Optional[Cubature] = None,
        truth: Optional[HarmonicCoefficients] = None,
        tol: float = 1e-9,
        max_steps: int = 200,
    ) -> Tuple[HarmonicCoefficients, ReportTable]:
        """Recover f from samples of its transform.

        Raises:
            PreconditionError: On a method/transform/input mismatch
        """
        if samples.manifold != _DATA_MANIFOLD[kind]:
            raise PreconditionError(
                f"{kind.value} data lives on {_DATA_MANIFOLD[kind].value}, samples are on {samples.manifold.value}"
            )
        if method == "spline":
            return self._invert_spline(kind, samples, t, levels, truth)
        if method == "discrete":
            return self._invert_discrete(kind, samples, omega, cubature, truth)
        if method in ("iterative", "frame"):
            if kind == TransformKind.SO3_RADON:
                raise PreconditionError(f"{method} inversion reconstructs S2 data; use spline or discrete for so3")
            data, table = self.reconstruct(method, samples, omega, tol, max_steps)
            result = invert_data(kind, data)
            table.title = f"{method} inversion ({kind.value})"
            table.notes.append(f"error vs truth: {format_number(_error(result, truth))}")
            return result, table
        raise PreconditionError(f"Unknown inversion method '{method}'")

    def _invert_spline(
        self,
        kind: TransformKind,
        samples: SampleSet,
        t: float,
        levels: Sequence[int],
        truth: Optional[HarmonicCoefficients],
    ) -> Tuple[HarmonicCoefficients, ReportTable]:
        table = ReportTable(title=f"Spline inversion ({kind.value})", columns=["level", "l2_error", "l2_norm"])
        result: Optional[HarmonicCoefficients] = None
        for level in levels:
            if kind == TransformKind.FUNK_RADON:
                result = spline_inversion_funk_radon(samples.points, samples.values, t, level, **self._spline_options)
            elif kind == TransformKind.HEMISPHERICAL:
                result = spline_inversion_hemispherical(samples.points, samples.values, level, t, **self._spline_options)
            else:
                result = spline_inversion_so3(samples.points, samples.values, t, level, **self._spline_options)
            table.add_row(level, _error(result, truth), l2_norm(result))
        if result is None:
            raise PreconditionError("No refinement levels given")
        return result, table

    def _invert_discrete(
        self,
        kind: TransformKind,
        samples: SampleSet,
        omega: float,
        cubature: Optional[Cubature],
        truth: Optional[HarmonicCoefficients],
    ) -> Tuple[HarmonicCoefficients, ReportTable]:
        if cubature is None:
            raise PreconditionError("Discrete inversion needs a cubature on the sample points")
        points = np.asarray(cubature.lattice.points).reshape(cubature.lattice.size, -1)
        if points.shape != samples.points.reshape(samples.size, -1).shape or not np.allclose(
            points, samples.points.reshape(samples.size, -1), atol=1e-12
        ):
            raise PreconditionError("Samples must be taken at the cubature nodes, in order")
        table = ReportTable(title=f"Discrete inversion ({kind.value})", columns=["quantity", "value"])
        if kind == TransformKind.FUNK_RADON:
            inversion = discrete_invert_funk_radon(samples.values, cubature, omega)
            result = inversion.coefficients
            table.add_row("odd_residual", inversion.odd_residual)
            table.add_row("vanishing_data", inversion.vanishing_data)
        elif kind == TransformKind.SO3_RADON:
            result = discrete_invert_so3(samples.values, cubature, omega)
        else:
            result = invert_data(kind, discrete_fourier(samples.values, cubature, omega))
        table.add_row("l2_error", _error(result, truth))
        table.add_row("l2_norm", l2_norm(result))
        return result, table

    def reconstruct(
        self,
        method: str,
        samples: SampleSet,
        omega: float,
        tol: float = 1e-9,
        max_steps: int = 200,
        truth: Optional[HarmonicCoefficients] = None,
        rho: Optional[float] = None,
    ) -> Tuple[HarmonicCoefficients, ReportTable]:
        """Recover ``f in E_omega`` from point samples iteratively."""
        lattice = self.sample_lattice(samples, rho)
        threads = self.config.threads
        if method == "voronoi":
            result, trace = iterative_reconstruct(samples.values, lattice, omega, tol, max_steps, truth, threads=threads)
        elif method == "frame":
            result, trace = frame_algorithm(samples.values, lattice, omega, None, tol, max_steps, truth, threads)
        else:
            raise PreconditionError(f"Unknown reconstruction method '{method}'")
        return result, self.trace_table(trace)

    @staticmethod
    def trace_table(trace: IterationTrace) -> ReportTable:
        table = ReportTable(title=f"{trace.method} iteration", columns=["step", "error", "update_norm"])
        for step, (error, update) in enumerate(zip(trace.errors, trace.update_norms), start=1):
            table.add_row(step, error, update)
        table.notes.append(
            f"contraction {format_number(trace.contraction)}, steps {trace.steps}, converged {trace.converged}"
        )
        return table

    def frame_bounds(self, lattice: Lattice, omega: float) -> ReportTable:
        lower, upper = pp_frame_bounds(lattice, omega, self.config.threads)
        table = ReportTable(title="Frame bounds", columns=["quantity", "value"])
        table.add_row("A", lower)
        table.add_row("B", upper)
        table.add_row("eta", (upper - lower) / (upper + lower))
        return table

    def build_frame(self, j_max: int, lattice_constant: float) -> Tuple[FrameSystem, ReportTable]:
        fs = build_frame(j_max, lattice_constant, self.config.seed)
        table = ReportTable(
            title="Parseval frame",
            columns=["level", "atoms", "k_band", "min_weight_scaled", "max_weight_scaled"],
        )
        for level in fs.levels:
            scale = 4.0**level.j
            table.add_row(
                level.j,
                level.cubature.lattice.size,
                level.k_band,
                float(level.weights.min()) * scale,
                float(level.weights.max()) * scale,
            )
        rng = np.random.default_rng(self.config.seed)
        sample = random_coefficients(Manifold.S2, fs.coverage, rng)
        table.notes.append(f"Parseval defect on a random covered function: {frame_energy_defect(sample, fs):.3g}")
        return fs, table

    def analyze_frame(self, fs: FrameSystem, f: HarmonicCoefficients) -> ReportTable:
        coefficients = frame_analyze(f, fs, self.config.threads)
        table = ReportTable(title="Frame coefficients", columns=["level", "atom", "value"])
        for j, values in enumerate(coefficients):
            for k, value in enumerate(values):
                table.add_row(j, k, float(value))
        return table

    def synthesize_frame(self, fs: FrameSystem, path: Path) -> HarmonicCoefficients:
        return frame_synthesize(read_frame_coefficients(path, fs), fs, self.config.threads)

    def profile_frame(self, fs: FrameSystem, level: int, atom: int) -> ReportTable:
        profile = localization_profile(fs, level, atom)
        table = ReportTable(title=f"Atom ({level}, {atom}) profile", columns=["distance", "abs_value"])
        for distance, value in zip(profile.distances, profile.values):
            table.add_row(float(distance), float(value))
        for order, value in sorted(profile.normalized_sup.items()):
            table.notes.append(f"normalized sup N={order}: {value:.6g}")
        return table


def read_frame_coefficients(path: Path, fs: FrameSystem) -> List[np.ndarray]:
    """Read a ``level atom value`` TSV table into per-level arrays.

    Raises:
        FormatError: On a malformed table or indices outside the frame
    """
    arrays = [np.zeros(level.cubature.lattice.size) for level in fs.levels]
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t")
        header = next(reader, None)
        if header != ["level", "atom", "value"]:
            raise FormatError("Expected header 'level atom value'", 1)
        for number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                j, k, value = int(row[0]), int(row[1]), float(row[2])
                if j < 0 or k < 0:
                    raise IndexError(j, k)
                arrays[j][k] = value
            except (ValueError, IndexError) as e:
                raise FormatError(f"Bad frame coefficient row {row}", number) from e
    return arrays
