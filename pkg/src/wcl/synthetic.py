"""Random operator families with planted structure, for tests and benchmarks.

Every generator takes a ``numpy.random.Generator`` and returns the
operator together with the ground truth it was built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operator import MatrixOperator, Symbol, WeightedComposition
from .space import make_interval_space

GRID_VALUES = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])


def grid_space(n_points, name=""):
    """Compact uniform grid on [0, 1] with ``n_points`` samples (at least 9)."""
    return make_interval_space(0.0, 1.0, n_points - 1, name=name)


def random_grid_matrix(rng, shape):
    """Entries drawn uniformly from {−1, −½, 0, ½, 1}."""
    return rng.choice(GRID_VALUES, size=shape)


@dataclass
class Planted:
    T: object
    Y1: np.ndarray
    phi: np.ndarray
    h: np.ndarray


def weighted_permutation_plus_contraction(rng, nx=None, extra=None):
    """Pure rows ±e_φ(y) covering every column, plus rows of 1-norm <= ½.

    The pure rows sit at random positions among the codomain samples.
    """
    nx = int(rng.integers(9, 17)) if nx is None else nx
    extra = int(rng.integers(1, 9)) if extra is None else extra
    ny = nx + extra
    X, Y = grid_space(nx), grid_space(ny)
    A = np.zeros((ny, nx))
    Y1 = np.sort(rng.choice(ny, nx, replace=False))
    phi = rng.permutation(nx)
    h = rng.choice([-1.0, 1.0], size=nx)
    A[Y1, phi] = h
    for y in np.setdiff1d(np.arange(ny), Y1):
        r = rng.uniform(-1, 1, nx) * (rng.random(nx) < 0.5)
        s = np.abs(r).sum()
        if s > 0:
            A[y] = r / s * rng.uniform(0.05, 0.5)
    return Planted(MatrixOperator(X, Y, A), Y1, phi, h)


def bijective_dp(rng, n=None):
    """Weighted permutation matrix with weights ±U[0.5, 2]."""
    n = int(rng.integers(9, 25)) if n is None else n
    X, Y = grid_space(n), grid_space(n)
    phi = rng.permutation(n)
    h = rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.5, 2.0, size=n)
    A = np.zeros((n, n))
    A[np.arange(n), phi] = h
    return Planted(MatrixOperator(X, Y, A), np.arange(n), phi, h)


@dataclass
class BlowupFamily:
    levels: list
    Y2: np.ndarray
    F: np.ndarray
    Y3: np.ndarray


def blowup_family(rng, *, K=5, nx=40, ny=30, planted=True, noise=0.1):
    """Refinement family T^(1..K) of DP matrices.

    Base rows carry one weight ±U[0.5, 2] (some rows are zero) perturbed by
    a factor 1 ± ``noise`` per level.  With ``planted`` set, up to three
    rows grow like c·k (c in [4, 6]) while their column slides onto one of
    at most two limit points x*, at least three samples apart.
    """
    X, Y = grid_space(nx), grid_space(ny)
    base_phi = rng.integers(0, nx, size=ny)
    base_h = rng.choice([-1.0, 1.0], size=ny) * rng.uniform(0.5, 2.0, size=ny)
    zero = rng.random(ny) < 0.15
    base_h[zero] = 0.0
    rows = np.empty(0, dtype=np.int64)
    targets = np.empty(0, dtype=np.int64)
    F = np.empty(0, dtype=np.int64)
    if planted:
        nF = int(rng.integers(1, 3))
        while True:
            F = np.sort(rng.choice(nx - K, nF, replace=False))
            if nF == 1 or np.diff(F).min() >= 3:
                break
        live = np.flatnonzero(~zero)
        rows = np.sort(rng.choice(live, int(rng.integers(1, 4)), replace=False))
        targets = F[np.arange(len(rows)) % nF]
        F = np.unique(targets)
        scale = rng.uniform(4.0, 6.0, size=len(rows))
    levels = []
    for k in range(1, K + 1):
        A = np.zeros((ny, nx))
        w = base_h * (1 + rng.uniform(-noise, noise, size=ny))
        A[np.arange(ny), base_phi] = w
        for j, y in enumerate(rows):
            A[y] = 0.0
            A[y, targets[j] + (K - k)] = scale[j] * k * np.sign(base_h[y])
        levels.append(MatrixOperator(X, Y, A))
    Y3 = np.flatnonzero(zero)
    return BlowupFamily(levels, rows, F, Y3)


@dataclass
class ProperSymbol:
    T: WeightedComposition
    flipped: WeightedComposition
    c: float
    shift: float


def tail_constant_symbol(rng, *, R=40.0, n=800, mode="isometric", levels=8):
    """Random proper φ on the line over the half-line with h constant on both tails.

    φ is the identity on y >= 0.  On [−a, 0] it follows a lazy ±1 walk in
    sample index (reflected at 0); beyond −a it continues as −y − shift.
    The weight is c on y >= 0 and on y < −a, and random with |h| <= 1 in
    between.  ``flipped`` is the same operator with −c on the negative tail.
    """
    Y = make_interval_space(-math.inf, math.inf, n, ("+∞", "−∞"), truncate=R, levels=levels)
    X = make_interval_space(0.0, math.inf, n // 2, ("+∞",), truncate=R, levels=levels)
    y = Y.coords
    mesh = Y.mesh
    inner = R / levels
    a_steps = int(rng.integers(5, int(0.8 * inner / mesh)))
    i0 = int(np.argmin(np.abs(y)))
    phi = np.empty(Y.size, dtype=np.int64)
    phi[i0:] = np.arange(Y.size - i0)
    p = 0
    for s in range(1, a_steps + 1):
        p = abs(p + int(rng.integers(-1, 2)))
        phi[i0 - s] = p
    shift_steps = a_steps - p
    for j in range(i0 - a_steps - 1, -1, -1):
        phi[j] = (i0 - j) - shift_steps
    if mode == "isometric":
        c = float(rng.choice([-1.0, 1.0]))
    else:
        c = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
    h = np.full(Y.size, c)
    mid = slice(i0 - a_steps, i0)
    h[mid] = rng.uniform(-1, 1, size=a_steps)
    hf = h.copy()
    hf[: i0 - a_steps] = -c
    T = WeightedComposition(X, Y, Symbol(phi, h))
    Tf = WeightedComposition(X, Y, Symbol(phi, hf))
    return ProperSymbol(T, Tf, c, shift_steps * mesh)

