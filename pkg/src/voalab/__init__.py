"""Exact computations with vertex operator algebras at genus zero."""

from .scalars import GENERIC, RatFunc, parse_scalar
from .voa import CutoffError, build_heisenberg, build_virasoro, build_voa

__all__ = ["GENERIC", "RatFunc", "parse_scalar", "CutoffError",
           "build_heisenberg", "build_virasoro", "build_voa"]
__version__ = "0.1.0"
