"""Exact and asymptotic moments of powered normal maxima ``|M_n|^t``."""

from .convergence import verify_density, verify_theorem
from .exactdist import exact_moment, powered_cdf, powered_pdf
from .gumbel import moment_table
from .norming import NormingScale, scale_from_b, scale_from_n

__all__ = [
    "NormingScale",
    "exact_moment",
    "moment_table",
    "powered_cdf",
    "powered_pdf",
    "scale_from_b",
    "scale_from_n",
    "verify_density",
    "verify_theorem",
]
__version__ = "0.1.0"
