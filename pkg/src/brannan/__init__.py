"""Numerical checks for bounds on Brannan coefficients.

The coefficients A_m(alpha, beta, x) of (1 + x z)**alpha / (1 - z)**beta are
evaluated by direct summation and, for beta = 1, through an integral
representation against a singular weight.  On top of these sit margin
checks for the intermediate inequalities, grid scans and a command line.
"""

from .errors import (
    BrannanError,
    DomainError,
    IoError,
    MonotonicityViolated,
    NonConvergence,
    NonFinite,
    SingularPoint,
    UnknownCheck,
)
from .inequalities import MarginResult, RootResult
from .integral_rep import phi_quadrature, phi_series, phi_sq_diff, weight_F
from .quadrature import QuadratureResult, QuadratureSpec, integrate, integrate2d
from .scanner import CheckReport, GridSpec, emit, scan
from .series import SeriesQuery, brannan_margin, partial_sum, value_at_one

__version__ = "0.1.0"

__all__ = [
    "BrannanError",
    "CheckReport",
    "DomainError",
    "GridSpec",
    "IoError",
    "MarginResult",
    "MonotonicityViolated",
    "NonConvergence",
    "NonFinite",
    "QuadratureResult",
    "QuadratureSpec",
    "RootResult",
    "SeriesQuery",
    "SingularPoint",
    "UnknownCheck",
    "brannan_margin",
    "emit",
    "integrate",
    "integrate2d",
    "partial_sum",
    "phi_quadrature",
    "phi_series",
    "phi_sq_diff",
    "scan",
    "value_at_one",
    "weight_F",
]
