"""Main CLI entry point for mradon."""

import logging
import sys
import traceback
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler

from mradon import __version__
from mradon.checks import all_passed, check_names, run_checks
from mradon.errors import CertificationError, FormatError, PreconditionError
from mradon.models import (
    Cubature,
    FrameSystem,
    HarmonicCoefficients,
    Lattice,
    Manifold,
    SampleSet,
    SplineProblem,
    TransformKind,
)
from mradon.reporters.reporter_service import ReporterService, ReportFormat, ReportTable
from mradon.services.config_manager import ConfigManager
from mradon.services.experiment_service import ExperimentService

EXIT_CERTIFICATION = 2
EXIT_PRECONDITION = 3
EXIT_USAGE = 64

FRAME_MANIFEST_NAME = "frame.mrfrm"

_MANIFOLDS = [m.value for m in Manifold]
_TRANSFORMS = [t.value for t in TransformKind]


class ExperimentGroup(click.Group):
    """Click group reporting usage errors with exit code 64."""

    def parse_args(self, ctx: click.Context, args: List[str]) -> List[str]:
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("mradon")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _parse_levels(ctx: click.Context, param: click.Parameter, value: str) -> Tuple[int, ...]:
    try:
        levels = tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'")
    if not levels or min(levels) < 0:
        raise click.BadParameter("levels must be non-negative integers")
    return levels


@contextmanager
def _handle_errors(ctx: click.Context) -> Iterator[None]:
    """Map library exceptions onto exit codes."""
    try:
        yield
    except CertificationError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_CERTIFICATION)
    except (PreconditionError, FormatError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_PRECONDITION)
    except FileNotFoundError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_PRECONDITION)
    except (click.ClickException, click.exceptions.Exit):
        raise
    except Exception as e:
        click.echo(f"Unexpected error: {e}", err=True)
        if ctx.obj.get("verbose"):
            traceback.print_exc()
        sys.exit(1)


def _service(ctx: click.Context) -> ExperimentService:
    config = ConfigManager(ctx.obj.get("config")).load_config(
        {
            "seed": ctx.obj.get("seed"),
            "threads": ctx.obj.get("threads"),
            "output_directory": ctx.obj.get("output_dir"),
        }
    )
    return ExperimentService(config)


def _emit(table: ReportTable, output: Optional[Path], svc: ExperimentService) -> None:
    """Write ``table`` as TSV when a path is given, else show it on the console."""
    reporter = ReporterService()
    if output is None:
        reporter.display(table)
        return
    path = svc.resolve_output(output)
    reporter.render(table, ReportFormat.TSV, path)
    click.echo(f"Table written to: {path}")


def _record(svc: ExperimentService, output: Path, command: str, parameters: Dict[str, Any]) -> None:
    manifest = svc.write_manifest(output, command, parameters)
    logging.getLogger(__name__).info(f"Manifest written to {manifest}")


@click.group(cls=ExperimentGroup)
@click.version_option(version=__version__, prog_name="mradon")
@click.option("--verbose", is_flag=True, help="Enable debug logging")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Path to a key=value configuration file",
)
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker cap (falls back to MR_THREADS)")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory for relative output paths",
)
@click.pass_context
def main(
    ctx: click.Context,
    verbose: bool,
    config: Optional[Path],
    threads: Optional[int],
    seed: Optional[int],
    output_dir: Optional[Path],
) -> None:
    """mradon - sampling, splines and frames for Radon transforms on S2 and SO(3).

    Every command that writes a file also writes <file>.manifest.json with
    the effective parameters, so runs can be reproduced exactly.

    Examples:

        # Certified lattice on the sphere
        mradon lattice --manifold S2 --rho 0.2 --symmetric --out s2.mrlat

        # Positive cubature exact up to eigenvalue 42
        mradon cubature --lattice s2.mrlat --omega 42 --out s2.mrcub

        # Run the built-in checks
        mradon selftest
    """
    ctx.ensure_object(dict)
    ctx.obj.update(verbose=verbose, config=config, threads=threads, seed=seed, output_dir=output_dir)
    _configure_logging(verbose)


@click.command()
def version() -> None:
    """Display version information."""
    click.echo(f"mradon version {__version__}")


@click.command()
@click.option("--manifold", type=click.Choice(_MANIFOLDS, case_sensitive=False), required=True)
@click.option("--rho", type=float, required=True, help="Mesh parameter")
@click.option("--symmetric/--no-symmetric", default=False, help="Antipodally closed lattice (S2 only)")
@click.option("--seed", "lattice_seed", type=int, default=None, help="Seed of the template rotation")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def lattice(
    ctx: click.Context, manifold: str, rho: float, symmetric: bool, lattice_seed: Optional[int], out: Path
) -> None:
    """Generate a certified rho-lattice and print its certificate.

    Exit code 2 when the covering cannot be certified.
    """
    if lattice_seed is not None:
        ctx.obj["seed"] = lattice_seed
    with _handle_errors(ctx):
        svc = _service(ctx)
        result, table = svc.create_lattice(Manifold.parse(manifold), rho, symmetric)
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(svc, path, "lattice", {"manifold": manifold, "rho": rho, "symmetric": symmetric})
        ReporterService().display(table)


@click.command()
@click.option("--lattice", "lattice_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--omega", type=float, required=True, help="Exactness bandwidth")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def cubature(ctx: click.Context, lattice_path: Path, omega: float, out: Path) -> None:
    """Compute positive cubature weights on a lattice."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        nodes = svc.formats.load_as(lattice_path, Lattice)
        result, table = svc.create_cubature(nodes, omega)
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(svc, path, "cubature", {"lattice": lattice_path, "omega": omega})
        ReporterService().display(table)


@click.command()
@click.option("--direction", type=click.Choice(["forward", "inverse"]), required=True)
@click.option("--transform", type=click.Choice(_TRANSFORMS), required=True)
@click.option("--in", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def radon(ctx: click.Context, direction: str, transform: str, input_path: Path, out: Path) -> None:
    """Apply a Radon transform or its inverse to a coefficient file."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        c = svc.formats.load_as(input_path, HarmonicCoefficients)
        result = svc.apply_transform(direction, TransformKind(transform), c)
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(svc, path, "radon", {"direction": direction, "transform": transform, "in": input_path})
        click.echo(f"Coefficients written to: {path}")


@click.command()
@click.option("--problem", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--t", "smoothness", type=float, default=None, help="Override the problem's smoothness")
@click.option("--k-max", type=click.IntRange(min=0), default=None, help="Fixed truncation degree")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def spline(ctx: click.Context, problem: Path, smoothness: Optional[float], k_max: Optional[int], out: Path) -> None:
    """Solve a variational spline problem."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        loaded = svc.formats.load_as(problem, SplineProblem)
        if smoothness is not None:
            loaded = SplineProblem(functionals=loaded.functionals, values=loaded.values, t=smoothness)
        result, table = svc.fit_spline(loaded, k_max)
        path = svc.resolve_output(out)
        svc.formats.save(result.coefficients, path)
        _record(svc, path, "spline", {"problem": problem, "t": loaded.t, "k_max": k_max})
        ReporterService().display(table)


@click.command()
@click.option("--method", type=click.Choice(["spline", "discrete", "iterative", "frame"]), required=True)
@click.option("--transform", type=click.Choice(_TRANSFORMS), required=True)
@click.option("--samples", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--cubature", "cubature_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--omega", type=float, default=None, help="Bandwidth of the recovered function")
@click.option("--t", "smoothness", type=float, default=0.0, show_default=True)
@click.option("--levels", default="0", callback=_parse_levels, help="Comma-separated refinement levels")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--max-steps", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--truth", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--table", "table_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def invert(
    ctx: click.Context,
    method: str,
    transform: str,
    samples: Path,
    cubature_path: Optional[Path],
    omega: Optional[float],
    smoothness: float,
    levels: Tuple[int, ...],
    tol: float,
    max_steps: int,
    truth: Optional[Path],
    table_path: Optional[Path],
    out: Path,
) -> None:
    """Recover a function from samples of its Radon transform.

    With --truth the report holds errors against the known function; with
    several --levels the spline method emits an error-versus-level table.
    """
    with _handle_errors(ctx):
        svc = _service(ctx)
        data = svc.formats.load_as(samples, SampleSet)
        rule = svc.formats.load_as(cubature_path, Cubature) if cubature_path else None
        known = svc.formats.load_as(truth, HarmonicCoefficients) if truth else None
        if omega is None and method != "spline":
            raise PreconditionError(f"--omega is required for the {method} method")
        result, table = svc.invert(
            method,
            TransformKind(transform),
            data,
            omega if omega is not None else 0.0,
            t=smoothness,
            levels=levels,
            cubature=rule,
            truth=known,
            tol=tol,
            max_steps=max_steps,
        )
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(
            svc,
            path,
            "invert",
            {
                "method": method,
                "transform": transform,
                "samples": samples,
                "cubature": cubature_path,
                "omega": omega,
                "t": smoothness,
                "levels": ",".join(str(level) for level in levels),
                "tol": tol,
                "max_steps": max_steps,
            },
        )
        _emit(table, table_path, svc)


@click.command()
@click.option("--method", type=click.Choice(["voronoi", "frame"]), required=True)
@click.option("--samples", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--omega", type=float, required=True, help="Bandwidth of the sampled function")
@click.option("--rho", type=float, default=None, help="Mesh parameter of the samples (measured if omitted)")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--max-steps", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--truth", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--table", "table_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def reconstruct(
    ctx: click.Context,
    method: str,
    samples: Path,
    omega: float,
    rho: Optional[float],
    tol: float,
    max_steps: int,
    truth: Optional[Path],
    table_path: Optional[Path],
    out: Path,
) -> None:
    """Reconstruct a bandlimited function from point samples.

    Exit code 2 when the iteration diverges or the samples are rank deficient.
    """
    with _handle_errors(ctx):
        svc = _service(ctx)
        data = svc.formats.load_as(samples, SampleSet)
        known = svc.formats.load_as(truth, HarmonicCoefficients) if truth else None
        result, table = svc.reconstruct(method, data, omega, tol, max_steps, known, rho)
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(
            svc,
            path,
            "reconstruct",
            {"method": method, "samples": samples, "omega": omega, "rho": rho, "tol": tol, "max_steps": max_steps},
        )
        _emit(table, table_path, svc)


@click.group(cls=ExperimentGroup)
def frame() -> None:
    """Build and use Parseval frames on S2."""


@frame.command("build")
@click.option("--jmax", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--c", "lattice_constant", type=float, default=0.5, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.pass_context
def frame_build(ctx: click.Context, jmax: int, lattice_constant: float, out_dir: Path) -> None:
    """Build a frame and write its manifest and level files."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        fs, table = svc.build_frame(jmax, lattice_constant)
        path = svc.resolve_output(out_dir) / FRAME_MANIFEST_NAME
        svc.formats.save(fs, path)
        _record(svc, path, "frame build", {"jmax": jmax, "c": lattice_constant})
        ReporterService().display(table)


@frame.command("analyze")
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--in", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def frame_analyze(ctx: click.Context, manifest: Path, input_path: Path, out: Path) -> None:
    """Write the frame coefficients of a coefficient file as a level/atom/value table."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        fs = svc.formats.load_as(manifest, FrameSystem)
        c = svc.formats.load_as(input_path, HarmonicCoefficients)
        table = svc.analyze_frame(fs, c)
        _emit(table, out, svc)
        _record(svc, svc.resolve_output(out), "frame analyze", {"manifest": manifest, "in": input_path})


@frame.command("synthesize")
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--in", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_context
def frame_synthesize(ctx: click.Context, manifest: Path, input_path: Path, out: Path) -> None:
    """Synthesize coefficients from a level/atom/value table."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        fs = svc.formats.load_as(manifest, FrameSystem)
        result = svc.synthesize_frame(fs, input_path)
        path = svc.resolve_output(out)
        svc.formats.save(result, path)
        _record(svc, path, "frame synthesize", {"manifest": manifest, "in": input_path})
        click.echo(f"Coefficients written to: {path}")


@frame.command("profile")
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--level", type=click.IntRange(min=0), required=True)
@click.option("--atom", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def frame_profile(ctx: click.Context, manifest: Path, level: int, atom: int, out: Optional[Path]) -> None:
    """Radial decay profile of one frame atom."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        fs = svc.formats.load_as(manifest, FrameSystem)
        table = svc.profile_frame(fs, level, atom)
        _emit(table, out, svc)
        if out is not None:
            _record(svc, svc.resolve_output(out), "frame profile", {"manifest": manifest, "level": level, "atom": atom})


@click.command()
@click.option("--only", type=click.Choice(check_names()), default=None, help="Run a single check")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def selftest(ctx: click.Context, only: Optional[str], out: Optional[Path]) -> None:
    """Run the built-in acceptance checks; exit code 2 if any fails."""
    with _handle_errors(ctx):
        svc = _service(ctx)
        table = run_checks(svc.config.seed, only)
        _emit(table, out, svc)
        if not all_passed(table):
            click.echo("Self-test failed", err=True)
            sys.exit(EXIT_CERTIFICATION)


# Register commands
main.add_command(version)
main.add_command(lattice)
main.add_command(cubature)
main.add_command(radon)
main.add_command(spline)
main.add_command(invert)
main.add_command(reconstruct)
main.add_command(frame)
main.add_command(selftest)


def run() -> None:
    """Console-script entry point."""
    main(obj={})


if __name__ == "__main__":
    run()
