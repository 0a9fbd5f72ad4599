"""Exception hierarchy for mradon.

Each error class carries an ``exit_code`` used by the command-line driver:
2 for certification or feasibility failures and 3 for precondition
violations.
"""

from typing import Any, Optional


class MRadonError(RuntimeError):
    """Base class for all library errors."""

    exit_code = 1


class PreconditionError(MRadonError, ValueError):
    """An input violates a documented precondition."""

    exit_code = 3


class FormatError(MRadonError, ValueError):
    """A data file is malformed.

    Attributes:
        line_number: 1-based line of the offending content, if known
    """

    exit_code = 3

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CertificationError(MRadonError):
    """A numerical certificate could not be established."""

    exit_code = 2


class LatticeCertificationError(CertificationError):
    """Lattice generation failed to reach the requested covering radius."""

    def __init__(self, message: str, covering_radius: float):
        super().__init__(message)
        self.covering_radius = covering_radius


class CubatureInfeasibleError(CertificationError):
    """No positive-weight cubature with the requested exactness was found."""

    def __init__(self, message: str, residual: float, worst_moment: Any):
        super().__init__(message)
        self.residual = residual
        self.worst_moment = worst_moment


class SplineSolveError(CertificationError):
    """The spline Gram matrix is not numerically positive definite."""

    def __init__(self, message: str, smallest_eigenvalue: float):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class RankDeficientSamplingError(CertificationError):
    """Sampling set does not determine the bandlimited space."""

    def __init__(self, message: str, lower_bound: float):
        super().__init__(message)
        self.lower_bound = lower_bound


class ReconstructionDivergedError(CertificationError):
    """An iterative reconstruction stopped contracting."""

    def __init__(self, message: str, trace: Any):
        super().__init__(message)
        self.trace = trace


class FrameBuildError(CertificationError):
    """A frame level could not be given a certified cubature."""

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level
