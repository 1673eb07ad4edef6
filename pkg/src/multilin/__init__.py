"""Numerical laboratory for multilinear Fourier multipliers."""

from .grid import Field, Grid, Symbol, forward_ft, inverse_ft, lp_norm, make_grid, sample
from .multiplier import apply_multiplier

__version__ = "0.1.0"

__all__ = [
    "Field", "Grid", "Symbol", "apply_multiplier", "forward_ft", "inverse_ft",
    "lp_norm", "make_grid", "sample", "__version__",
]
