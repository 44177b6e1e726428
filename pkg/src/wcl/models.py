"""Builders for the worked example operators.

* ``example5``: an into-isometry from C0([0, ∞)) into C([−∞, +∞]) whose
  peak region is the closed half of the extended line.
* ``example6``: the projection of a line-with-half-strip onto the line.
* ``example9``: φ(y) = |y| with a sign-changing weight, an isometry and
  DP map that admits no extension to the compactifications.
* ``nonproper_symbol`` / ``growing_weight_symbol``: the two weights and
  maps on the line that break properness or bounded weights.
"""

from __future__ import annotations

import math

import numpy as np

from .funcspace import DEFAULT_TOL
from .operator import (
    MatrixOperator,
    WeightedComposition,
    build_weighted_composition,
    symbol_from_maps,
)
from .space import (
    make_extended_line_space,
    make_interval_space,
    make_line_with_strip_space,
    nearest_index,
)


# -- example 5 -------------------------------------------------------------

def example5_spaces(R=20.0, n=400):
    """X = [0, R] with a +∞ tail; Y = the extended line on the same mesh.

    Y covers [−R − δ, R + δ] (δ the mesh) so that every y in [−R, R] is an
    ordinary sample and the two flagged extremes stand for ±∞.
    """
    X = make_interval_space(0.0, math.inf, n, ("+∞",), truncate=R, name=f"halfline-R{R:g}-n{n}")
    Y = make_extended_line_space(R + X.mesh, 2 * n + 2, name=f"extline-R{R:g}-n{n}")
    return X, Y


def example5_operator(R=20.0, n=400):
    """Tf(y) = f(y) for y >= 0, e^y (f(−y) + f(0))/2 for y < 0, 0 at ±∞."""
    X, Y = example5_spaces(R, n)
    A = np.zeros((Y.size, X.size))
    y = Y.coords
    ends = {Y.markers["-inf"], Y.markers["+inf"]}
    for i in range(Y.size):
        if i in ends:
            continue
        if y[i] >= -1e-12 * R:
            A[i, nearest_index(X, [y[i]])[0]] = 1.0
        else:
            A[i, nearest_index(X, [-y[i]])[0]] += math.exp(y[i]) / 2
            A[i, 0] += math.exp(y[i]) / 2
    return MatrixOperator(X, Y, A)


def example5_expected_y1(Y):
    """Samples of [0, +∞) in the Y model, i.e. y >= 0 minus the +∞ marker."""
    y = Y.coords
    keep = y >= -1e-12
    keep[Y.markers["+inf"]] = False
    return np.flatnonzero(keep)


# -- example 6 -------------------------------------------------------------

def example6_spaces(R=10.0, n=200):
    X = make_interval_space(-math.inf, math.inf, n, ("+∞", "−∞"), truncate=R,
                            name=f"line-R{R:g}-n{n}")
    Y = make_line_with_strip_space(R, n, name=f"linestrip-R{R:g}-n{n}")
    return X, Y


def example6_symbol(X, Y):
    return symbol_from_maps(X, Y, lambda p: p[:, 0], lambda p: 1.0)


def example6_operator(R=10.0, n=200, tol=DEFAULT_TOL, seed=0):
    X, Y = example6_spaces(R, n)
    return build_weighted_composition(X, Y, example6_symbol(X, Y), tol, seed=seed)


def example6_open_set(Y):
    """O = {0 <= u1 < 1, 0 < u2 <= 1}, open in Y although φ(O) = [0, 1) is not."""
    u1, u2 = Y.points[:, 0], Y.points[:, 1]
    eps = 1e-9 * Y.mesh
    return np.flatnonzero((u1 >= -eps) & (u1 < 1 - eps) & (u2 > eps) & (u2 <= 1 + eps))


# -- example 9 -------------------------------------------------------------

def example9_h(y):
    """1 for y > 2, y − 1 on [0, 2], −1 for y < 0."""
    y = np.asarray(y, dtype=float)
    return np.where(y > 2, 1.0, np.where(y >= 0, y - 1.0, -1.0))


def example9_spaces(R=50.0, n=2000):
    """Y = [−R, R] with both tails (n steps); X = [0, R] with a +∞ tail, same mesh."""
    if n % 2:
        raise ValueError("n must be even so both grids share the mesh")
    Y = make_interval_space(-math.inf, math.inf, n, ("+∞", "−∞"), truncate=R,
                            name=f"line-R{R:g}-n{n}")
    X = make_interval_space(0.0, math.inf, n // 2, ("+∞",), truncate=R,
                            name=f"halfline-R{R:g}-n{n // 2}")
    return X, Y


def example9_operator(R=50.0, n=2000, *, h=None, tol=DEFAULT_TOL, validate=False):
    """Tf = h·f∘|·|; ``h`` replaces the weight (a function of y) when given."""
    X, Y = example9_spaces(R, n)
    sym = symbol_from_maps(X, Y, np.abs, example9_h if h is None else h)
    if validate:
        return build_weighted_composition(X, Y, sym, tol)
    return WeightedComposition(X, Y, sym)


# -- a non-proper map and a growing weight ------------------------------------

def line_spaces(R=20.0, n=800):
    X = make_interval_space(-math.inf, math.inf, n, ("+∞", "−∞"), truncate=R,
                            name=f"line-R{R:g}-n{n}")
    return X, X


def nonproper_symbol(X, Y):
    """h = e^y, φ = sin y for y < 0; h = 1, φ = y otherwise."""
    return symbol_from_maps(
        X, Y,
        lambda y: np.where(y < 0, np.sin(y), y),
        lambda y: np.where(y < 0, np.exp(np.minimum(y, 0.0)), 1.0),
    )


def growing_weight_symbol(X, Y):
    """h = e^y, φ = y: the weight outgrows every C0 decay rate."""
    return symbol_from_maps(X, Y, lambda y: y, np.exp)
