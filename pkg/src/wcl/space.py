"""Finite sample models of locally compact metric spaces.

A :class:`Space` is a finite point cloud in R^d (d = 1 or 2) together with a
nested compact exhaustion K_1 ⊆ ... ⊆ K_L and, for noncompact models, the
labelled tails along which points escape to infinity.  The one-point
compactification is available through :func:`compactify`, which appends an
explicit sample standing for the point at infinity.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidSpec

DEFAULT_LEVELS = 8

#: marker name of the adjoined point of a one-point compactification
INFINITY_MARKER = "inf"

_REL = 1e-9


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Space:
    """Immutable finite model of a locally compact space.

    ``exhaustion[i]`` holds the (sorted) indices of window K_{i+1}.
    ``tails`` maps a direction label to the indices of the points outside
    K_1 escaping along it, ordered outward.  ``markers`` names distinguished
    samples, e.g. the flagged ends of the extended line or the adjoined
    infinity of a compactified model.
    """

    points: np.ndarray
    mesh: float
    exhaustion: tuple
    is_compact_model: bool
    tails: dict = field(default_factory=dict)
    markers: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        object.__setattr__(self, "points", _frozen(pts, float))
        object.__setattr__(
            self, "exhaustion", tuple(_frozen(np.sort(k), np.int64) for k in self.exhaustion)
        )
        object.__setattr__(
            self, "tails", {str(k): _frozen(v, np.int64) for k, v in self.tails.items()}
        )
        object.__setattr__(self, "markers", {str(k): int(v) for k, v in self.markers.items()})
        if not self.name:
            object.__setattr__(self, "name", "space-" + self.digest()[:12])
        self._validate()

    # -- basic shape ---------------------------------------------------
    @property
    def size(self):
        return self.points.shape[0]

    def __len__(self):
        return self.size

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def levels(self):
        """Number L of exhaustion windows."""
        return len(self.exhaustion)

    @property
    def infinity_index(self):
        """Index of the adjoined infinity sample, or None."""
        return self.markers.get(INFINITY_MARKER)

    @property
    def finite_mask(self):
        mask = np.ones(self.size, dtype=bool)
        if self.infinity_index is not None:
            mask[self.infinity_index] = False
        return mask

    @property
    def coords(self):
        """1-D coordinates; only meaningful when ``dim == 1``."""
        return self.points[:, 0]

    @property
    def tail_levels(self):
        """Levels ℓ whose tail set is nonempty (1-based), in increasing order."""
        return [lvl for lvl in range(1, self.levels + 1) if len(tail_points(self, lvl))]

    def window_level(self):
        """Per point, the smallest ℓ with the point in K_ℓ."""
        lvl = np.full(self.size, self.levels + 1, dtype=np.int64)
        for i in range(self.levels, 0, -1):
            lvl[self.exhaustion[i - 1]] = i
        return lvl

    def digest(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.points).tobytes())
        h.update(repr(float(self.mesh)).encode())
        for k in self.exhaustion:
            h.update(b"|" + np.ascontiguousarray(k).tobytes())
        for key in sorted(self.tails):
            h.update(key.encode() + np.ascontiguousarray(self.tails[key]).tobytes())
        h.update(repr(sorted(self.markers.items())).encode())
        return h.hexdigest()

    def same_as(self, other):
        return self is other or (
            isinstance(other, Space) and self.size == other.size and self.digest() == other.digest()
        )

    # -- validation ----------------------------------------------------
    def _validate(self):
        n = self.size
        if not (self.mesh > 0 and math.isfinite(self.mesh)):
            raise InvalidSpec(f"mesh must be positive, got {self.mesh}")
        if self.dim not in (1, 2):
            raise InvalidSpec(f"only d in {{1, 2}} supported, got d={self.dim}")
        finite = self.points[self.finite_mask]
        if not np.all(np.isfinite(finite)):
            raise InvalidSpec("non-finite coordinates outside the infinity marker")
        if len(np.unique(finite, axis=0)) != len(finite):
            raise InvalidSpec("points must be pairwise distinct")
        if not self.exhaustion:
            raise InvalidSpec("exhaustion must have at least one window")
        for a, b in zip(self.exhaustion, self.exhaustion[1:]):
            if not (np.all(np.isin(a, b)) and len(b) > len(a)):
                raise InvalidSpec("exhaustion windows must be strictly nested")
        last = self.exhaustion[-1]
        if self.is_compact_model:
            if len(last) != n:
                raise InvalidSpec("compact model needs K_L = all points")
            if self.tails:
                raise InvalidSpec("compact model cannot carry tails")
        else:
            if not self.tails:
                raise InvalidSpec("noncompact model needs at least one tail direction")
            outside = np.setdiff1d(np.arange(n), self.exhaustion[0])
            labelled = np.concatenate(list(self.tails.values()))
            if len(labelled) != len(np.unique(labelled)) or not np.array_equal(
                np.sort(labelled), outside
            ):
                raise InvalidSpec("tail directions must partition the points outside K_1")
            for label, idx in self.tails.items():
                if len(idx) > 1:
                    steps = np.linalg.norm(np.diff(self.points[idx], axis=0), axis=1)
                    if np.any(steps > 3 * self.mesh * (1 + _REL)):
                        raise InvalidSpec(f"tail {label!r} jumps more than 3 mesh steps")
        for key, i in self.markers.items():
            if not 0 <= i < n:
                raise InvalidSpec(f"marker {key!r} out of range")

    # -- serialization -------------------------------------------------
    def to_dict(self):
        pts = [[("inf" if not math.isfinite(c) else float(c)) for c in row] for row in self.points]
        return {
            "id": self.name,
            "points": pts,
            "mesh": float(self.mesh),
            "exhaustion": [k.tolist() for k in self.exhaustion],
            "is_compact_model": bool(self.is_compact_model),
            "tails": {k: v.tolist() for k, v in self.tails.items()},
            "markers": dict(self.markers),
        }

    @classmethod
    def from_dict(cls, doc):
        pts = np.array(
            [[(math.inf if c == "inf" else float(c)) for c in row] for row in doc["points"]],
            dtype=float,
        )
        return cls(
            points=pts,
            mesh=float(doc["mesh"]),
            exhaustion=tuple(np.array(k, dtype=np.int64) for k in doc["exhaustion"]),
            is_compact_model=bool(doc["is_compact_model"]),
            tails={k: np.array(v, dtype=np.int64) for k, v in doc.get("tails", {}).items()},
            markers=doc.get("markers", {}),
            name=doc.get("id", ""),
        )


def _dedupe_windows(windows):
    out = []
    for w in windows:
        if len(w) and (not out or len(w) > len(out[-1])):
            out.append(w)
    return out


def make_interval_space(a, b, n, tails=(), *, levels=DEFAULT_LEVELS, truncate=None,
                        compact=None, markers=None, name=""):
    """Uniform grid on [a, b] with n steps (n + 1 samples, mesh = (b - a)/n).

    Infinite endpoints are truncated at ±``truncate`` and must be paired with
    the matching tail label ("+∞" or "−∞").  With no tails the model is
    compact and has the single window K_1 = all points; otherwise the
    exhaustion consists of ``levels`` nested windows that grow toward the
    tailed ends (central windows when both ends are tailed).
    """
    tails = tuple(_canonical_tail(t) for t in tails)
    if math.isinf(b):
        if b < 0 or truncate is None:
            raise InvalidSpec("an infinite right end needs a positive truncation radius")
        if "+∞" not in tails:
            raise InvalidSpec("an infinite right end needs the '+∞' tail")
        b = float(truncate)
    if math.isinf(a):
        if a > 0 or truncate is None:
            raise InvalidSpec("an infinite left end needs a positive truncation radius")
        if "−∞" not in tails:
            raise InvalidSpec("an infinite left end needs the '−∞' tail")
        a = -float(truncate)
    if n < 8:
        raise InvalidSpec(f"need n >= 8 samples steps, got {n}")
    if not a < b:
        raise InvalidSpec(f"need a < b, got a={a}, b={b}")
    if compact is None:
        compact = not tails
    if compact and tails:
        raise InvalidSpec("tails contradict a compact model")
    if not compact and not tails:
        raise InvalidSpec("a noncompact model needs a tail direction")

    span = b - a
    x = a + span * np.arange(n + 1) / n
    mesh = span / n
    idx = np.arange(n + 1)
    slack = _REL * mesh
    if compact:
        return Space(x, mesh, (idx,), True, {}, markers or {}, name)

    windows = []
    if set(tails) == {"+∞"}:
        for i in range(1, levels + 1):
            windows.append(idx[x <= a + span * i / levels + slack])
    elif set(tails) == {"−∞"}:
        for i in range(1, levels + 1):
            windows.append(idx[x >= b - span * i / levels - slack])
    else:
        c = (a + b) / 2
        for i in range(1, levels + 1):
            windows.append(idx[np.abs(x - c) <= span / 2 * i / levels + slack])
    windows = _dedupe_windows(windows)
    first = windows[0]
    tail_map = {}
    if "+∞" in tails:
        tail_map["+∞"] = idx[x > x[first].max()]
    if "−∞" in tails:
        tail_map["−∞"] = idx[x < x[first].min()][::-1]
    return Space(x, mesh, tuple(windows), False, tail_map, markers or {}, name)


def make_extended_line_space(R, n, *, name=""):
    """Compact model of the extended line [−∞, +∞].

    The grid covers [−R, R]; its two extreme samples are flagged with the
    markers "-inf" and "+inf" and are otherwise ordinary points.
    """
    s = make_interval_space(-R, R, n, markers=None, name=name)
    return Space(s.points, s.mesh, s.exhaustion, True, {}, {"-inf": 0, "+inf": s.size - 1}, s.name)


def make_line_with_strip_space(R, n, *, height=1.0, levels=DEFAULT_LEVELS, name=""):
    """The line {u2 = 0} together with the half strip {u1 >= 0, 0 <= u2 <= height}.

    Both pieces share the abscissa grid of [−R, R] with ``n`` steps; the strip
    rows are spaced by the same mesh, so ``height / mesh`` must be an integer.
    Windows are |u1| <= R·i/L; tails are the two ends of the line, the right
    one ordered column by column in boustrophedon order so consecutive tail
    samples stay one mesh apart.
    """
    line = make_interval_space(-R, R, n)
    mesh = line.mesh
    rows = height / mesh
    if abs(rows - round(rows)) > 1e-6 or round(rows) < 1:
        raise InvalidSpec("strip height must be a positive multiple of the mesh")
    rows = int(round(rows))
    xs = line.coords
    pts = [(u, 0.0) for u in xs]
    cols = {}
    for j, u in enumerate(xs):
        cols[j] = [j]
        if u >= -_REL * mesh:
            for r in range(1, rows + 1):
                cols[j].append(len(pts))
                pts.append((u, height * r / rows))
    pts = np.array(pts)
    ncols = len(xs)
    idx = np.arange(len(pts))
    u1 = pts[:, 0]
    windows = _dedupe_windows(
        [idx[np.abs(u1) <= R * i / levels + _REL * mesh] for i in range(1, levels + 1)]
    )
    edge = R / levels + _REL * mesh
    right, left = [], []
    flip = False
    for j in range(ncols):
        if xs[j] > edge:
            col = cols[j][::-1] if flip else cols[j]
            right.extend(col)
            flip = not flip
    for j in range(ncols - 1, -1, -1):
        if xs[j] < -edge:
            left.extend(cols[j])
    return Space(pts, mesh, tuple(windows), False, {"+∞": right, "−∞": left}, {}, name)


def compactify(s):
    """One-point compactification: append the sample ∞ to ``s``.

    The result is a compact model with a single window; the new sample has
    coordinates +inf and the marker ``"inf"``.
    """
    if s.infinity_index is not None:
        return s
    pts = np.vstack([s.points, np.full((1, s.dim), np.inf)])
    markers = dict(s.markers)
    markers[INFINITY_MARKER] = s.size
    return Space(pts, s.mesh, (np.arange(s.size + 1),), True, {}, markers, s.name + "+inf")


def tail_points(s, level):
    """Indices outside the window K_level (empty for level >= L)."""
    if level < 1:
        raise ValueError("levels are 1-based")
    if level > s.levels:
        if s.is_compact_model:
            return np.empty(0, dtype=np.int64)
        raise ValueError(f"level {level} exceeds L={s.levels}")
    return np.setdiff1d(np.arange(s.size), s.exhaustion[level - 1])


def distances_from(s, i):
    """Euclidean distances from sample ``i`` to every sample (∞ is infinitely far)."""
    inf = s.infinity_index
    if inf is not None and i == inf:
        d = np.full(s.size, np.inf)
        d[i] = 0.0
        return d
    with np.errstate(invalid="ignore"):
        d = np.linalg.norm(s.points - s.points[i], axis=1)
    if inf is not None:
        d[inf] = np.inf
    return d


def neighbors(s, i, radius):
    """All j with dist(points[j], points[i]) <= radius (closed ball)."""
    if radius < s.mesh * (1 - _REL):
        raise ValueError(f"radius {radius} below the mesh {s.mesh}")
    return np.flatnonzero(distances_from(s, i) <= radius * (1 + _REL))


def adjacent_pairs(s, radius):
    """All unordered pairs (i, j), i < j, of finite samples within ``radius``.

    Returned as an (m, 2) array in lexicographic order.
    """
    fin = np.flatnonzero(s.finite_mask)
    tree = cKDTree(s.points[fin])
    pairs = tree.query_pairs(radius * (1 + _REL), output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.int64)
    pairs = fin[pairs]
    pairs.sort(axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def nearest_index(s, coords):
    """Snap coordinates (shape (m,) or (m, d)) to the nearest finite samples."""
    c = np.asarray(coords, dtype=float)
    if c.ndim == 1:
        c = c[:, None] if s.dim == 1 else c[None, :]
    fin = np.flatnonzero(s.finite_mask)
    _, j = cKDTree(s.points[fin]).query(c)
    return fin[j]


def _canonical_tail(t):
    t = str(t).strip()
    table = {"+inf": "+∞", "+∞": "+∞", "inf": "+∞", "∞": "+∞",
             "-inf": "−∞", "−inf": "−∞", "-∞": "−∞", "−∞": "−∞"}
    if t not in table:
        raise InvalidSpec(f"unknown tail direction {t!r}")
    return table[t]
