"""mradon - sampling, splines, cubature and frames for Radon transforms on S2, S2xS2 and SO(3)."""

__version__ = "0.1.0"
__author__ = "mradon developers"
__description__ = "Bandlimited sampling and stable inversion of spherical Radon transforms"
