"""Bandlimited localized Parseval frames on S2.

Level filters come from a smooth cutoff ``g`` (1 on [0, 1], 0 beyond 4):
``Phi_0 = sqrt(g)`` and ``Phi_j(s) = sqrt(g(4^-j s) - g(4^(1-j) s))``, so the
squares telescope to ``g(4^-J s)``. Atoms are stored spectrally and every
level carries a cubature exact on products of its own band.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from ..errors import CertificationError, FrameBuildError, PreconditionError
from ..models import (
    BANDWIDTH_SLACK,
    Cubature,
    FilterBank,
    FrameLevel,
    FrameSystem,
    HarmonicCoefficients,
    LocalizationProfile,
    Manifold,
    degree_eigenvalue,
)
from .discretize import compute_cubature, product_bandwidth
from .geometry import generate_lattice
from .harmonics import sph_harmonic_blocks, sph_harmonic_matrix, zonal_series
from .parallel import assemble_rows
from .spaces import from_vector, l2_norm, to_vector

logger = logging.getLogger(__name__)

DEFAULT_J_MAX = 3
DEFAULT_LATTICE_CONSTANT = 0.5
DECAY_ORDERS = (2, 4, 6)


def _bump(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    positive = u > 0
    out[positive] = np.exp(-1.0 / u[positive])
    return out


def smooth_step(s: np.ndarray) -> np.ndarray:
    """Infinitely smooth non-increasing cutoff, 1 on [0, 1] and 0 on [4, inf)."""
    s = np.asarray(s, dtype=float)
    left = _bump((4.0 - s) / 3.0)
    right = _bump((s - 1.0) / 3.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ramp = left / (left + right)
    return np.where(s <= 1.0, 1.0, np.where(s >= 4.0, 0.0, ramp))


def level_filter(j: int, s: np.ndarray) -> np.ndarray:
    """``Phi_j(s)`` evaluated at eigenvalues ``s``."""
    s = np.asarray(s, dtype=float)
    if j == 0:
        return np.sqrt(smooth_step(s))
    squared = smooth_step(s / 4.0**j) - smooth_step(s / 4.0 ** (j - 1))
    return np.sqrt(np.clip(squared, 0.0, None))


def band_degree(j: int) -> int:
    """Highest degree k with ``k(k+1) < 4^(j+1)``, the top of level j's band."""
    k = int(math.isqrt(4 ** (j + 1)))
    while degree_eigenvalue(k) >= 4 ** (j + 1):
        k -= 1
    return k


def atom_in_band(atom: HarmonicCoefficients, j: int) -> bool:
    """Whether every degree of ``atom`` lies where ``Phi_j`` can be nonzero.

    ``Phi_0`` lives on ``[0, 4)`` and ``Phi_j`` on ``(4^(j-1), 4^(j+1))`` for j >= 1.
    """
    low = 4.0 ** (j - 1) if j > 0 else -1.0
    high = 4.0 ** (j + 1)
    return all(low < degree_eigenvalue(int(k)) < high for k in atom.blocks)  # type: ignore[arg-type]


def build_filter_bank(j_max: int) -> FilterBank:
    """Tabulate the level filters on degrees 0..band_degree(j_max).

    Raises:
        PreconditionError: If j_max < 1
    """
    if j_max < 1:
        raise PreconditionError(f"J_max must be at least 1, got {j_max}")
    k = np.arange(band_degree(j_max) + 1)
    eigenvalues = k * (k + 1.0)
    phi = np.stack([level_filter(j, eigenvalues) for j in range(j_max + 1)])
    return FilterBank(j_max=j_max, phi=phi)


def partition_residual(filter_bank: FilterBank, s: np.ndarray) -> float:
    """``max |g(4^-J s) - sum_j Phi_j(s)^2|`` over ``s``; zero up to rounding."""
    total = sum(level_filter(j, s) ** 2 for j in range(filter_bank.j_max + 1))
    return float(np.max(np.abs(total - smooth_step(np.asarray(s) / 4.0**filter_bank.j_max))))


def build_frame(
    j_max: int = DEFAULT_J_MAX,
    lattice_constant: float = DEFAULT_LATTICE_CONSTANT,
    seed: int = 0,
) -> FrameSystem:
    """Build the Parseval frame covering eigenvalues up to ``4^j_max``.

    Level j uses a lattice with ``rho_j = lattice_constant * 2^-j`` and a
    cubature exact to ``product_bandwidth`` of its band with itself.

    Raises:
        FrameBuildError: If the lattice or cubature of some level cannot be certified
    """
    filter_bank = build_filter_bank(j_max)
    levels: List[FrameLevel] = []
    for j in range(j_max + 1):
        k_band = band_degree(j)
        rho = lattice_constant * 2.0**-j
        band = degree_eigenvalue(k_band)
        try:
            lattice = generate_lattice(Manifold.S2, rho, seed=seed + j)
            cubature = compute_cubature(lattice, product_bandwidth(band, band))
        except (CertificationError, PreconditionError) as e:
            raise FrameBuildError(f"Frame level {j} failed: {e}", level=j) from e
        levels.append(FrameLevel(j=j, k_band=k_band, cubature=cubature))
        logger.info(f"Frame level {j}: {lattice.size} atoms, band up to degree {k_band}")
    return FrameSystem(filter_bank=filter_bank, levels=tuple(levels), lattice_constant=lattice_constant)


def frame_from_cubatures(filter_bank: FilterBank, cubatures: Sequence[Cubature], lattice_constant: float) -> FrameSystem:
    """Reassemble a frame from stored per-level cubatures.

    Raises:
        PreconditionError: If a level cubature is not exact enough for its band
    """
    if len(cubatures) != filter_bank.j_max + 1:
        raise PreconditionError(f"Expected {filter_bank.j_max + 1} level cubatures, got {len(cubatures)}")
    levels = []
    for j, cubature in enumerate(cubatures):
        k_band = band_degree(j)
        band = degree_eigenvalue(k_band)
        if cubature.omega_exact + BANDWIDTH_SLACK < product_bandwidth(band, band):
            raise PreconditionError(f"Level {j} cubature exact to {cubature.omega_exact}, too low for its band")
        levels.append(FrameLevel(j=j, k_band=k_band, cubature=cubature))
    return FrameSystem(filter_bank=filter_bank, levels=tuple(levels), lattice_constant=lattice_constant)


def _level_filter_vector(fs: FrameSystem, level: FrameLevel) -> np.ndarray:
    k = np.arange(level.k_band + 1)
    return np.repeat(fs.filter_bank.phi[level.j, : level.k_band + 1], 2 * k + 1)


def _centre_basis(level: FrameLevel, threads: int) -> np.ndarray:
    centres = level.centres
    width = (level.k_band + 1) ** 2
    return assemble_rows(
        centres.shape[0], width, lambda rows: sph_harmonic_matrix(level.k_band, centres[rows]), threads
    )


def _check_coverage(f: HarmonicCoefficients, fs: FrameSystem) -> None:
    if f.manifold != Manifold.S2:
        raise PreconditionError("Frames are built on S2")
    if f.blocks and degree_eigenvalue(f.max_degree) > fs.coverage + BANDWIDTH_SLACK:
        raise PreconditionError(
            f"Function reaches eigenvalue {degree_eigenvalue(f.max_degree)} beyond frame coverage {fs.coverage}"
        )


def frame_analyze(f: HarmonicCoefficients, fs: FrameSystem, threads: int = 1) -> List[np.ndarray]:
    """Frame coefficients ``<f, Psi_{j,k}>`` level by level.

    Computed as ``sqrt(b_{j,k}) (Phi_j(L) f)(x_{j,k})``.

    Raises:
        PreconditionError: If f has content beyond the frame coverage
    """
    _check_coverage(f, fs)
    vector = to_vector(f, fs.filter_bank.k_max)
    coefficients = []
    for level in fs.levels:
        width = (level.k_band + 1) ** 2
        filtered = _level_filter_vector(fs, level) * vector[:width]
        coefficients.append(np.sqrt(level.weights) * (_centre_basis(level, threads) @ filtered))
    return coefficients


def frame_synthesize(coefficients: Sequence[np.ndarray], fs: FrameSystem, threads: int = 1) -> HarmonicCoefficients:
    """Spectral coefficients of ``sum_{j,k} a_{j,k} Psi_{j,k}``.

    Raises:
        PreconditionError: If the coefficient lengths do not match the frame levels
    """
    if len(coefficients) != len(fs.levels):
        raise PreconditionError(f"Expected {len(fs.levels)} coefficient levels, got {len(coefficients)}")
    k_max = fs.filter_bank.k_max
    vector = np.zeros((k_max + 1) ** 2)
    for level, values in zip(fs.levels, coefficients):
        values = np.asarray(values, dtype=float)
        if values.shape != (level.cubature.lattice.size,):
            raise PreconditionError(
                f"Level {level.j} expects {level.cubature.lattice.size} coefficients, got {values.shape}"
            )
        width = (level.k_band + 1) ** 2
        projected = _centre_basis(level, threads).T @ (np.sqrt(level.weights) * values)
        vector[:width] += _level_filter_vector(fs, level) * projected
    return from_vector(Manifold.S2, vector, k_max, degree_eigenvalue(k_max))


def frame_atom(fs: FrameSystem, j: int, k: int) -> HarmonicCoefficients:
    """Spectral coefficients of the normalized atom ``Psi_{j,k} = sqrt(b_{j,k}) psi_{j,k}``.

    Raises:
        PreconditionError: If (j, k) does not name an atom
    """
    level = _level(fs, j)
    if not 0 <= k < level.cubature.lattice.size:
        raise PreconditionError(f"Level {j} has no atom {k}")
    scale = math.sqrt(float(level.weights[k]))
    phi = fs.filter_bank.phi[j]
    blocks = {
        degree: scale * phi[degree] * block[0]
        for degree, block in sph_harmonic_blocks(level.k_band, level.centres[k: k + 1])
        if phi[degree] > 0
    }
    return HarmonicCoefficients(manifold=Manifold.S2, omega=degree_eigenvalue(level.k_band), blocks=blocks)


def _level(fs: FrameSystem, j: int) -> FrameLevel:
    if not 0 <= j < len(fs.levels):
        raise PreconditionError(f"Frame has no level {j}")
    return fs.levels[j]


def frame_energy_defect(f: HarmonicCoefficients, fs: FrameSystem, threads: int = 1) -> float:
    """Relative Parseval defect ``|sum |<f, Psi>|^2 - ||f||^2| / ||f||^2``."""
    norm_sq = l2_norm(f) ** 2
    if norm_sq == 0.0:
        return 0.0
    energy = sum(float(np.sum(values**2)) for values in frame_analyze(f, fs, threads))
    return abs(energy - norm_sq) / norm_sq


def localization_profile(
    fs: FrameSystem,
    j: int,
    k: int,
    n_distances: int = 361,
    orders: Sequence[int] = DECAY_ORDERS,
) -> LocalizationProfile:
    """Radial profile of ``|psi_{j,k}|`` and its normalized decay statistics.

    The atom is zonal around its centre, so its value at geodesic distance d
    is ``sum_k Phi_j(k(k+1)) (2k+1) P_k(cos d)``. For each order N the report
    holds ``sup_d |psi| (1 + 2^j d)^N 2^(-2j)``.
    """
    level = _level(fs, j)
    if not 0 <= k < level.cubature.lattice.size:
        raise PreconditionError(f"Level {j} has no atom {k}")
    degrees = np.arange(level.k_band + 1)
    series = fs.filter_bank.phi[j, : level.k_band + 1] * (2 * degrees + 1)
    distances = np.linspace(0.0, math.pi, n_distances)
    values = np.abs(zonal_series(series, np.cos(distances)))
    normalized = {
        int(order): float(np.max(values * (1.0 + 2.0**j * distances) ** order) / 4.0**j)
        for order in orders
    }
    return LocalizationProfile(level=j, atom=k, distances=distances, values=values, normalized_sup=normalized)


def discrete_frame_representation(
    samples: np.ndarray,
    master: Cubature,
    fs: FrameSystem,
    levels: int,
    omega: Optional[float] = None,
    threads: int = 1,
) -> HarmonicCoefficients:
    """Reconstruct f from point samples through the frame, levels 0..levels.

    ``<f, psi_{j,k}>`` is computed with the master cubature as
    ``sum_nu mu_nu f(x_nu) psi_{j,k}(x_nu)`` and the result is
    ``sum_{j,k} b_{j,k} <f, psi_{j,k}> psi_{j,k}``.

    Args:
        samples: f at the master cubature nodes
        master: Cubature on S2
        fs: Frame system with at least ``levels + 1`` levels
        levels: Highest level J used; f must lie in ``E_omega`` with omega <= 4^J
        omega: Bandwidth of f, default ``4^J - 1``

    Raises:
        PreconditionError: If the levels, bandwidth or master exactness do not fit
    """
    if master.manifold != Manifold.S2:
        raise PreconditionError("Discrete frame representation needs an S2 master cubature")
    if not 0 <= levels <= fs.j_max:
        raise PreconditionError(f"Level count {levels} outside 0..{fs.j_max}")
    omega = 4.0**levels - 1.0 if omega is None else omega
    if omega > 4.0**levels + BANDWIDTH_SLACK:
        raise PreconditionError(f"Bandwidth {omega} not covered by levels 0..{levels}")
    used = fs.levels[: levels + 1]
    top = max(level.k_band for level in used)
    needed = product_bandwidth(omega, degree_eigenvalue(top))
    if master.omega_exact + BANDWIDTH_SLACK < needed:
        raise PreconditionError(
            f"Master cubature exact to {master.omega_exact}, frame representation needs {needed}"
        )
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (master.lattice.size,):
        raise PreconditionError(f"{samples.shape[0]} samples for {master.lattice.size} master nodes")

    nodes = master.lattice.points
    node_basis = assemble_rows(nodes.shape[0], (top + 1) ** 2, lambda rows: sph_harmonic_matrix(top, nodes[rows]), threads)
    weighted = node_basis.T @ (master.weights * samples)
    vector = np.zeros((top + 1) ** 2)
    for level in used:
        width = (level.k_band + 1) ** 2
        filters = _level_filter_vector(fs, level)
        centre_basis = _centre_basis(level, threads)
        # psi_{j,k}(x_nu) = sum_i Phi_j u_i(x_{j,k}) u_i(x_nu)
        inner = centre_basis @ (filters * weighted[:width])
        vector[:width] += filters * (centre_basis.T @ (level.weights * inner))
    return from_vector(Manifold.S2, vector, top, omega)
