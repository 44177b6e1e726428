"""Weighted composition operators on sampled C0 spaces."""

from .errors import WclError
from .funcspace import C0Tolerance, ScalarFunction
from .operator import (
    INFINITY,
    LinearOperator,
    MatrixOperator,
    Symbol,
    WeightedComposition,
    build_weighted_composition,
)
from .space import Space, compactify, make_interval_space

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "C0Tolerance", "LinearOperator", "MatrixOperator", "ScalarFunction",
    "Space", "Symbol", "WclError", "WeightedComposition", "build_weighted_composition",
    "compactify", "make_interval_space",
]
