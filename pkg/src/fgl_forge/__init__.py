"""Exact formal-group-law calculus: p-typical laws, l-series, Euler classes,
cyclic-group presentations, effective injectivity bounds and fixed-point
assembly for circle actions."""

from .ringcore import CoefElem, Ideal, Kind, RingSpec
from .series import BiSeries, USeries
from .fgl import FormalGroupLaw, build_law, build_ptypical, formal_inverse, l_series, reduce_fgl

__version__ = "0.1.0"

__all__ = [
    "CoefElem",
    "Ideal",
    "Kind",
    "RingSpec",
    "BiSeries",
    "USeries",
    "FormalGroupLaw",
    "build_law",
    "build_ptypical",
    "formal_inverse",
    "l_series",
    "reduce_fgl",
]
