"""Sampled scalar functions on a :class:`~wcl.space.Space` with C0 structure.

Builders (``hat``, ``peak_family``, ``tent``, ``bump``, ``indicator``) emit
exact 0/1 plateau values, so norm-one and disjointness assertions built on
them do not depend on tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import EmptyRegion, InvalidSpec, SpaceMismatch, TruncationTooSmall
from .space import Space, distances_from, tail_points

_REL = 1e-9


@dataclass(frozen=True)
class C0Tolerance:
    """Numerical surrogates for exact conditions.

    eps_tail: a C0 function must be below this on the outermost tail level.
    eps_zero: values at or below this count as zero (cozero threshold).
    eps_eq: threshold for equality of values.
    """

    eps_tail: float = 1e-3
    eps_zero: float = 1e-9
    eps_eq: float = 1e-9

    def __post_init__(self):
        if not (0 < self.eps_zero <= self.eps_tail):
            raise InvalidSpec("need 0 < eps_zero <= eps_tail")
        if not self.eps_eq > 0:
            raise InvalidSpec("need eps_eq > 0")

    @classmethod
    def discrete(cls, eps_tail=1e-3):
        return cls(eps_tail, 1e-9, 1e-9)

    @classmethod
    def continuum(cls, eps_tail=1e-3):
        return cls(eps_tail, 1e-6, 1e-6)


DEFAULT_TOL = C0Tolerance.discrete()


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    space: Space
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.space.size,):
            raise SpaceMismatch(f"expected {self.space.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def _other(self, g):
        if isinstance(g, ScalarFunction):
            if not self.space.same_as(g.space):
                raise SpaceMismatch("functions live on different spaces")
            return g.values
        return g

    def __add__(self, g):
        return ScalarFunction(self.space, self.values + self._other(g))

    __radd__ = __add__

    def __sub__(self, g):
        return ScalarFunction(self.space, self.values - self._other(g))

    def __rsub__(self, g):
        return ScalarFunction(self.space, self._other(g) - self.values)

    def __mul__(self, g):
        return ScalarFunction(self.space, self.values * self._other(g))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarFunction(self.space, -self.values)

    def tail_profile(self):
        """max |f| over tail_points(ℓ) for each nonempty tail level ℓ."""
        a = np.abs(self.values)
        return [float(a[tail_points(self.space, lvl)].max()) for lvl in self.space.tail_levels]

    def is_c0(self, tol=DEFAULT_TOL):
        """Sampled vanishing-at-infinity test.

        Tail maxima must be non-increasing and at most ``eps_tail`` on the
        outermost nonempty level.  Compact models pass trivially.
        """
        return c0_violation(self, tol) is None

    def to_dict(self):
        return {"space_id": self.space.name, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, doc, space):
        if doc.get("space_id", space.name) != space.name:
            raise SpaceMismatch(f"function is on {doc['space_id']!r}, not {space.name!r}")
        return cls(space, doc["values"])


def c0_violation(f, tol=DEFAULT_TOL):
    """None if ``f`` passes the tail-decay test, else (level, tail max)."""
    prof = f.tail_profile()
    if not prof:
        return None
    for k in range(1, len(prof)):
        if prof[k] > prof[k - 1] * (1 + _REL):
            return f.space.tail_levels[k], prof[k]
    if prof[-1] > tol.eps_tail:
        return f.space.tail_levels[-1], prof[-1]
    return None


class Support(NamedTuple):
    """Closure of a cozero in the compactified model."""

    indices: np.ndarray
    at_infinity: bool

    def __contains__(self, i):
        return bool(np.isin(i, self.indices))


def zero(space):
    return ScalarFunction(space, np.zeros(space.size))


def constant(space, c=1.0):
    return ScalarFunction(space, np.full(space.size, float(c)))


def indicator(space, i):
    """The unit spike e_i."""
    v = np.zeros(space.size)
    v[i] = 1.0
    return ScalarFunction(space, v)


def sup_norm(f):
    return float(np.abs(f.values).max()) if len(f.values) else 0.0


def cozero(f, tol=DEFAULT_TOL):
    return np.flatnonzero(np.abs(f.values) > tol.eps_zero)


def support(f, tol=DEFAULT_TOL):
    """Cozero dilated by one mesh step, plus ∞ when the cozero reaches every tail level."""
    s = f.space
    coz = cozero(f, tol)
    if len(coz) == 0:
        return Support(coz, False)
    fin = np.flatnonzero(s.finite_mask)
    tree = cKDTree(s.points[fin])
    coz_fin = coz[s.finite_mask[coz]]
    hit = set(coz.tolist())
    if len(coz_fin):
        for lst in tree.query_ball_point(s.points[coz_fin], s.mesh * (1 + _REL)):
            hit.update(fin[lst].tolist())
    levels = s.tail_levels
    at_inf = bool(levels) and all(
        np.intersect1d(coz, tail_points(s, lvl)).size for lvl in levels
    )
    if s.infinity_index is not None and s.infinity_index in hit:
        at_inf = True
    return Support(np.array(sorted(hit), dtype=np.int64), at_inf)


def hat(space, x, width):
    """Height-one hat centred at sample ``x``, zero at distance >= width."""
    if width < space.mesh * (1 - _REL):
        raise ValueError(f"width {width} below the mesh {space.mesh}")
    d = distances_from(space, x)
    v = np.where(d < width * (1 - _REL), 1.0 - d / width, 0.0)
    v[x] = 1.0
    return ScalarFunction(space, np.clip(v, 0.0, 1.0))


def peak_family(space, x, widths):
    """Members of S_x: hats peaking at ``x`` with |f(x)| = ‖f‖ = 1."""
    return [hat(space, x, w) for w in widths]


def window_anchor(space):
    """Coordinate origin of the exhaustion: centre of K_1 along the tailed axis.

    For a half-line model the anchor is the closed end.
    """
    k = space.exhaustion[0]
    first = space.points[k[space.finite_mask[k]]]
    lo, hi = first.min(axis=0), first.max(axis=0)
    if set(space.tails) == {"+∞"} and space.dim == 1:
        return lo
    if set(space.tails) == {"−∞"} and space.dim == 1:
        return hi
    centre = (lo + hi) / 2
    if space.dim == 2:
        centre = np.array([centre[0], 0.0])
    return centre


def anchor_distance(space):
    """Distance from the anchor, measured along the first axis."""
    with np.errstate(invalid="ignore"):
        d = np.abs(space.points[:, 0] - window_anchor(space)[0])
    if space.infinity_index is not None:
        d[space.infinity_index] = np.inf
    return d


def tent(n, space):
    """The tent f_n: 1 within distance n of the anchor, linear ramp to 0 at 2n.

    On a half-line model [0, R] this is f_n(x) = 1 on [0, n],
    (2n - x)/n on (n, 2n), 0 beyond.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    d = anchor_distance(space)
    reach = d[space.finite_mask].max()
    if 2 * n > reach * (1 + _REL):
        raise TruncationTooSmall(f"2n = {2 * n} exceeds the grid reach {reach}")
    v = np.where(d <= n, 1.0, np.where(d < 2 * n, (2 * n - d) / n, 0.0))
    return ScalarFunction(space, np.clip(v, 0.0, 1.0))


def max_tent(space):
    """Largest integer n for which :func:`tent` is defined."""
    d = anchor_distance(space)
    return int(math.floor(d[space.finite_mask].max() * (1 + _REL) / 2))


def _connected(space, U):
    if len(U) <= 1:
        return True
    pts = space.points[U]
    pairs = cKDTree(pts).query_pairs(1.5 * space.mesh, output_type="ndarray")
    if len(pairs) == 0:
        return False
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(U), len(U)))
    ncomp, _ = connected_components(g, directed=False)
    return ncomp == 1


def bump(U, space, ramp=None):
    """Height-one plateau function with cozero inside the region ``U``.

    The value at a sample is its distance to the complement of ``U``
    divided by the ramp width, capped at 1; the ramp defaults to two mesh
    steps, shrunk to the depth of ``U`` so the peak value 1 is attained.
    """
    U = np.unique(np.asarray(U, dtype=np.int64))
    if len(U) == 0:
        raise EmptyRegion("bump region is empty")
    if not _connected(space, U):
        raise ValueError("bump region must be connected within one mesh step")
    inside = np.zeros(space.size, dtype=bool)
    inside[U] = True
    outside = np.flatnonzero(~inside & space.finite_mask)
    depth = np.zeros(space.size)
    if len(outside) == 0:
        depth[U] = np.inf
    else:
        fin_u = U[space.finite_mask[U]]
        dd, _ = cKDTree(space.points[outside]).query(space.points[fin_u])
        depth[fin_u] = dd
        if space.infinity_index is not None and inside[space.infinity_index]:
            depth[space.infinity_index] = np.inf
    peak = depth[U].max()
    width = 2 * space.mesh if ramp is None else float(ramp)
    width = min(width, peak)
    v = np.minimum(1.0, depth / width)
    v[~inside] = 0.0
    return ScalarFunction(space, v)


def are_disjoint(f, g, tol=DEFAULT_TOL):
    """Sampled f·g = 0: max|f·g| <= eps_zero · max(‖f‖, ‖g‖)."""
    if not f.space.same_as(g.space):
        raise SpaceMismatch("functions live on different spaces")
    scale = max(sup_norm(f), sup_norm(g))
    return float(np.abs(f.values * g.values).max()) <= tol.eps_zero * scale


def decay_probe(space, tol=DEFAULT_TOL, scale=None):
    """exp(-d/s) in the anchor distance with the slowest C0-certified decay rate.

    ``s`` is chosen so that the value on the outermost tail level is just
    below eps_tail; operators with growing weights turn this into a non-C0 output.
    """
    d = anchor_distance(space)
    if scale is None:
        levels = space.tail_levels
        if not levels:
            return None
        reach = d[tail_points(space, levels[-1])].min()
        scale = reach / math.log(1.0 / tol.eps_tail) * (1 - 1e-9)
    v = np.exp(-d / scale)
    v[~np.isfinite(d)] = 0.0
    return ScalarFunction(space, v)


def random_c0(space, rng, tol=DEFAULT_TOL, nbumps=4):
    """Random C0-certified function: a few random hats times a certified envelope."""
    fin = np.flatnonzero(space.finite_mask)
    v = np.zeros(space.size)
    reach = float(np.ptp(space.points[fin], axis=0).max()) or space.mesh
    for _ in range(nbumps):
        x = int(rng.choice(fin))
        w = space.mesh * (1 + rng.random() * max(1.0, reach / space.mesh / 4))
        v += rng.uniform(-1, 1) * hat(space, x, w).values
    if space.infinity_index is not None:
        v[space.infinity_index] = 0.0
    m = np.abs(v).max()
    if m == 0:
        v[int(rng.choice(fin))] = 1.0
        m = 1.0
    v = v / m
    env = decay_probe(space, tol)
    if env is not None:
        v = v * env.values
        # rescale toward unit norm without lifting the outermost level past eps_tail
        outer = np.abs(v[tail_points(space, space.tail_levels[-1])]).max()
        gain = 1.0 / np.abs(v).max()
        if outer > 0:
            gain = min(gain, tol.eps_tail * (1 - 1e-9) / outer)
        v = v * max(gain, 1.0)
    return ScalarFunction(space, v)


def probe_corpus(space, tol=DEFAULT_TOL, seed=0, n_random=32):
    """Deterministic probe corpus used by operator validation and recovery.

    Contents: bumps over every exhaustion window, tents on 1-D models,
    hats of several widths centred in every window shell, the slow-decay
    probe, and ``n_random`` random C0-certified functions.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in space.exhaustion:
        k = k[space.finite_mask[k]]
        if len(k) and _connected(space, k):
            out.append(bump(k, space))
    if space.dim == 1 and not space.is_compact_model:
        n = 1
        while n <= max_tent(space):
            out.append(tent(n, space))
            n *= 2
    lvl = space.window_level()
    for i in range(1, space.levels + 1):
        shell = np.flatnonzero((lvl == i) & space.finite_mask)
        if len(shell) == 0:
            continue
        x = int(shell[rng.integers(len(shell))])
        for w in (1, 2, 4):
            out.append(hat(space, x, w * space.mesh))
    probe = decay_probe(space, tol)
    if probe is not None:
        out.append(probe)
    out.extend(random_c0(space, rng, tol) for _ in range(n_random))
    return out


def corpus_matrix(fs):
    return np.vstack([f.values for f in fs]) if fs else np.empty((0, 0))


def support_masks(fs, tol=DEFAULT_TOL):
    """Boolean (len(fs), |X|) matrix of support membership."""
    if not fs:
        return np.empty((0, 0), dtype=bool)
    m = np.zeros((len(fs), fs[0].space.size), dtype=bool)
    for r, f in enumerate(fs):
        m[r, support(f, tol).indices] = True
    return m
