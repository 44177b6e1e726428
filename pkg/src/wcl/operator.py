"""Linear operators between sampled C0 spaces.

Two backings: a dense matrix (row y is the functional δ_y∘T), or a symbol
(φ, h) giving the weighted composition Tf(y) = h(y)·f(φ(y)).  The checks
in this module decide properness, continuity, injection, isometry and
disjointness preservation; each returns a :class:`Report`.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InvalidSpec,
    NotContinuous,
    NotProper,
    OutputNotC0,
    SpaceMismatch,
    TooLargeForDefinitionalCheck,
    UnboundedWeight,
)
from .funcspace import (
    DEFAULT_TOL,
    ScalarFunction,
    c0_violation,
    hat,
    probe_corpus,
    sup_norm,
)
from .space import adjacent_pairs, distances_from, nearest_index, tail_points

log = logging.getLogger(__name__)

#: φ-value marking the adjoined point ∞
INFINITY = -1

DEFAULT_LIPSCHITZ = 1.5
MAX_DEFINITIONAL = 12


# ---------------------------------------------------------------------------
# symbols and operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Symbol:
    """The pair (φ, h).

    ``phi[k]`` is an index into the domain samples or :data:`INFINITY`;
    ``h[k]`` the weight.  ``rows`` lists the codomain samples the entries
    refer to; ``None`` means all of them, in order.
    """

    phi: np.ndarray
    h: np.ndarray
    rows: np.ndarray | None = None

    def __post_init__(self):
        phi = np.array(self.phi, dtype=np.int64)
        h = np.array(self.h, dtype=float)
        if phi.shape != h.shape or phi.ndim != 1:
            raise InvalidSpec("phi and h must be 1-D arrays of equal length")
        if not np.all(np.isfinite(h)):
            raise InvalidSpec("h must be finite")
        if np.any(phi < INFINITY):
            raise InvalidSpec("phi entries must be indices or INFINITY")
        phi.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "h", h)
        if self.rows is not None:
            rows = np.array(self.rows, dtype=np.int64)
            if rows.shape != phi.shape:
                raise InvalidSpec("rows must match phi in length")
            rows.setflags(write=False)
            object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.phi)

    @property
    def has_infinity(self):
        return bool(np.any(self.phi == INFINITY))

    def row_indices(self, ny=None):
        if self.rows is not None:
            return self.rows
        return np.arange(len(self.phi) if ny is None else ny)

    def to_dict(self):
        out = {
            "phi": ["inf" if p == INFINITY else int(p) for p in self.phi],
            "h": [float(v) for v in self.h],
        }
        if self.rows is not None:
            out["rows"] = self.rows.tolist()
        return out

    @classmethod
    def from_dict(cls, doc):
        phi = [INFINITY if p in ("inf", "∞") else int(p) for p in doc["phi"]]
        return cls(phi, doc["h"], doc.get("rows"))


@dataclass(frozen=True)
class WeightBounds:
    m: float
    M: float


def weight_bounds(sym):
    a = np.abs(sym.h)
    if len(a) == 0:
        return WeightBounds(0.0, 0.0)
    return WeightBounds(float(a.min()), float(a.max()))


def symbol_from_maps(X, Y, phi_fn, h_fn):
    """Sample a point map and weight given as functions of Y coordinates.

    ``phi_fn`` receives the (n, d) array of Y points (a 1-D array when d = 1)
    and returns X coordinates; results are snapped to the nearest X sample.
    Images farther than one mesh step outside the X grid are rejected.
    """
    fin = Y.finite_mask
    pts = Y.points[fin]
    arg = pts[:, 0] if Y.dim == 1 else pts
    target = np.asarray(phi_fn(arg), dtype=float)
    weights = np.asarray(h_fn(arg), dtype=float) * np.ones(len(pts))
    idx = nearest_index(X, target)
    snapped = X.points[idx]
    tgt = target[:, None] if target.ndim == 1 else target
    gap = np.linalg.norm(snapped - tgt, axis=1)
    if np.any(gap > X.mesh * (1 + 1e-9)):
        bad = int(np.flatnonzero(gap > X.mesh)[0])
        raise InvalidSpec(f"phi sends Y sample {bad} outside the X grid (gap {gap[bad]:.3g})")
    phi = np.full(Y.size, INFINITY, dtype=np.int64)
    h = np.zeros(Y.size)
    phi[fin] = idx
    h[fin] = weights
    return Symbol(phi, h)


class LinearOperator:
    """Linear map from functions on ``domain`` to functions on ``codomain``."""

    backing = None

    def __init__(self, domain, codomain):
        self.domain = domain
        self.codomain = codomain

    @property
    def shape(self):
        return (self.codomain.size, self.domain.size)

    def apply_values(self, values):
        raise NotImplementedError

    def to_matrix(self):
        raise NotImplementedError

    def row(self, y):
        raise NotImplementedError

    def apply(self, f):
        if not f.space.same_as(self.domain):
            raise SpaceMismatch(f"function lives on {f.space.name!r}, operator domain is "
                                f"{self.domain.name!r}")
        return ScalarFunction(self.codomain, self.apply_values(f.values))

    __call__ = apply

    def apply_many(self, F):
        """Apply to the rows of an (m, |X|) array; returns (m, |Y|)."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        return np.vstack([self.apply_values(r) for r in F]) if len(F) else np.empty((0, self.shape[0]))


class MatrixOperator(LinearOperator):
    backing = "matrix"

    def __init__(self, domain, codomain, matrix):
        super().__init__(domain, codomain)
        A = np.array(matrix, dtype=float)
        if A.shape != (codomain.size, domain.size):
            raise SpaceMismatch(f"matrix shape {A.shape} does not match spaces "
                                f"{(codomain.size, domain.size)}")
        if not np.all(np.isfinite(A)):
            raise InvalidSpec("matrix entries must be finite")
        A.setflags(write=False)
        self.matrix = A

    def apply_values(self, values):
        return self.matrix @ values

    def apply_many(self, F):
        F = np.atleast_2d(np.asarray(F, dtype=float))
        return F @ self.matrix.T

    def to_matrix(self):
        return self.matrix

    def row(self, y):
        return self.matrix[y]


class WeightedComposition(LinearOperator):
    """Tf(y) = h(y)·f(φ(y)); a φ-value of ∞ contributes f(∞) = 0 on C0."""

    backing = "wc"

    def __init__(self, domain, codomain, symbol):
        super().__init__(domain, codomain)
        if symbol.rows is not None:
            raise InvalidSpec("a weighted composition needs a symbol on every codomain sample")
        if len(symbol) != codomain.size:
            raise SpaceMismatch(f"symbol has {len(symbol)} entries, codomain {codomain.size}")
        if np.any(symbol.phi >= domain.size):
            raise SpaceMismatch("phi points outside the domain")
        self.symbol = symbol
        self._dense = None

    def _gather(self, values):
        phi = self.symbol.phi
        safe = np.where(phi == INFINITY, 0, phi)
        out = values[..., safe]
        return np.where(phi == INFINITY, 0.0, out)

    def apply_values(self, values):
        return self.symbol.h * self._gather(np.asarray(values, dtype=float))

    def apply_many(self, F):
        F = np.atleast_2d(np.asarray(F, dtype=float))
        return self.symbol.h[None, :] * self._gather(F)

    def to_matrix(self):
        if self._dense is None:
            A = np.zeros(self.shape)
            ok = self.symbol.phi != INFINITY
            ys = np.flatnonzero(ok)
            A[ys, self.symbol.phi[ok]] = self.symbol.h[ok]
            A.setflags(write=False)
            self._dense = A
        return self._dense

    def row(self, y):
        r = np.zeros(self.domain.size)
        if self.symbol.phi[y] != INFINITY:
            r[self.symbol.phi[y]] = self.symbol.h[y]
        return r


def apply(T, f):
    return T.apply(f)


def materialize(T):
    """The matrix-backed operator equal to ``T``."""
    if isinstance(T, MatrixOperator):
        return T
    return MatrixOperator(T.domain, T.codomain, T.to_matrix())


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """Outcome of a check: verdict string plus witnesses and residuals."""

    kind: str
    verdict: str
    passed: bool
    witnesses: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None

    def to_dict(self):
        out = {"kind": self.kind, "verdict": self.verdict, "passed": self.passed,
               "witnesses": self.witnesses, "residuals": self.residuals}
        if self.data:
            out["data"] = self.data
        return out


class PropernessReport(Report):
    pass


# ---------------------------------------------------------------------------
# continuity and properness of point maps
# ---------------------------------------------------------------------------

def _as_symbol(sym_or_phi):
    if isinstance(sym_or_phi, Symbol):
        return sym_or_phi
    phi = np.asarray(sym_or_phi, dtype=np.int64)
    return Symbol(phi, np.ones(len(phi)))


def _image_distance(X, a, b):
    out = np.empty(len(a))
    both = (a == INFINITY) & (b == INFINITY)
    one = (a == INFINITY) ^ (b == INFINITY)
    fin = ~(both | one)
    out[both] = 0.0
    out[one] = np.inf
    out[fin] = np.linalg.norm(X.points[a[fin]] - X.points[b[fin]], axis=1)
    return out


def check_continuity(sym, X, Y, L=DEFAULT_LIPSCHITZ):
    """Mesh-scale Lipschitz surrogate for continuity of φ.

    Every pair of (symbol) rows within 3·mesh_Y must satisfy
    dist(φ(y), φ(y')) <= L·dist(y, y'); the witness is the first violating
    pair in lexicographic order.
    """
    if L <= 0:
        raise ValueError("Lipschitz modulus must be positive")
    sym = _as_symbol(sym)
    rows = sym.row_indices(Y.size)
    pairs = adjacent_pairs(Y, 3 * Y.mesh)
    where = np.full(Y.size, -1, dtype=np.int64)
    where[rows] = np.arange(len(rows))
    keep = (where[pairs[:, 0]] >= 0) & (where[pairs[:, 1]] >= 0) if len(pairs) else np.array([], bool)
    pairs = pairs[keep]
    if len(pairs) == 0:
        return Report("continuity", "continuous", True, residuals={"max_ratio": 0.0, "pairs": 0})
    a = sym.phi[where[pairs[:, 0]]]
    b = sym.phi[where[pairs[:, 1]]]
    dy = np.linalg.norm(Y.points[pairs[:, 0]] - Y.points[pairs[:, 1]], axis=1)
    dx = _image_distance(X, a, b)
    ratio = dx / dy
    bad = np.flatnonzero(ratio > L * (1 + 1e-9))
    res = {"max_ratio": float(ratio.max()), "pairs": int(len(pairs)), "L": float(L)}
    if len(bad) == 0:
        return Report("continuity", "continuous", True, residuals=res)
    k = int(bad[0])
    y0, y1 = int(pairs[k, 0]), int(pairs[k, 1])
    w = {"y": y0, "y_prime": y1, "phi_y": int(a[k]), "phi_y_prime": int(b[k]),
         "dist_y": float(dy[k]), "dist_phi": float(dx[k])}
    return Report("continuity", "discontinuous", False, [w], res)


def _proper_windows(X):
    if X.is_compact_model:
        return [X.levels]
    return list(range(1, max(1, X.levels - 2) + 1))


def check_proper(sym, X, Y):
    """Window surrogate for properness of φ: Y → X.

    For every X window K_i (i <= L_X - 2 on noncompact models, so that the
    window stays clear of the truncation boundary) the preimage
    φ^{-1}(K_i) must avoid the outermost Y tail level.  A preimage that
    reaches it contains points escaping to infinity in Y while their images
    stay in K_i, i.e. φ(y) does not tend to ∞.
    """
    sym = _as_symbol(sym)
    rows = sym.row_indices(Y.size)
    levels = Y.tail_levels
    if not levels:
        return PropernessReport("proper", "proper", True, data={"reason": "compact codomain model"})
    deep = np.zeros(Y.size, dtype=bool)
    deep[tail_points(Y, levels[-1])] = True
    outer = np.zeros(Y.size, dtype=bool)
    outer[tail_points(Y, levels[0])] = True
    phi = sym.phi
    for i in _proper_windows(X):
        K = np.zeros(X.size, dtype=bool)
        K[X.exhaustion[i - 1]] = True
        hit = np.zeros(len(rows), dtype=bool)
        ok = phi != INFINITY
        hit[ok] = K[phi[ok]]
        pre = rows[hit]
        escaping = pre[deep[pre]]
        if len(escaping) == 0:
            continue
        kpts = X.points[X.exhaustion[i - 1]]
        kfin = kpts[np.all(np.isfinite(kpts), axis=1)]
        esc_all = pre[outer[pre]]
        ordered = []
        for label, idx in Y.tails.items():
            sel = idx[np.isin(idx, esc_all)]
            if len(sel):
                ordered.append({"tail": label, "indices": sel.tolist()})
        per_level = {str(lvl): int(np.isin(pre, tail_points(Y, lvl)).sum()) for lvl in levels}
        w = {"window_level": i,
             "window_bounds": [kfin.min(axis=0).tolist(), kfin.max(axis=0).tolist()],
             "escaping": ordered,
             "escaping_per_level": per_level}
        return PropernessReport("proper", "not_proper", False, [w])
    return PropernessReport("proper", "proper", True)


# ---------------------------------------------------------------------------
# building weighted compositions
# ---------------------------------------------------------------------------

def build_weighted_composition(X, Y, sym, tol=DEFAULT_TOL, *, lipschitz=DEFAULT_LIPSCHITZ,
                               weight_cap=None, corpus=None, seed=0):
    """Validated construction of Tf = h·f∘φ.

    When |h| is bounded below (min |h| > eps_tail, so the weight does not
    itself vanish at infinity on the model) φ must pass the continuity and
    properness surrogates.  Every operator must map the probe corpus to
    C0-certified outputs.  Raises the refusal with its witness.
    """
    if len(sym) != Y.size or sym.rows is not None:
        raise InvalidSpec("symbol must be defined on every codomain sample")
    if sym.has_infinity:
        raise InvalidSpec("phi may not target ∞ outside a compactified model")
    wb = weight_bounds(sym)
    if wb.m > tol.eps_tail:
        cont = check_continuity(sym, X, Y, lipschitz)
        if not cont:
            raise NotContinuous(f"phi jumps between Y samples {cont.witness['y']} and "
                                f"{cont.witness['y_prime']}", cont.to_dict())
        prop = check_proper(sym, X, Y)
        if not prop:
            raise NotProper("phi is not proper", prop.to_dict())
    T = WeightedComposition(X, Y, sym)
    if corpus is None:
        corpus = probe_corpus(X, tol, seed)
    # bounded weights rescale outputs; only tail growth beyond the inner scale counts
    inner = Y.exhaustion[0]
    scale = max(1.0, float(np.abs(sym.h[inner]).max()) if len(inner) else 1.0)
    for k, f in enumerate(corpus):
        if not f.is_c0(tol):
            continue
        Tf = T.apply(f)
        bad = c0_violation(Tf * (1.0 / scale), tol)
        if bad is not None:
            level, tail_max = bad
            tail_max *= scale
            detail = {"probe_index": k, "tail_level": int(level), "tail_max": float(tail_max),
                      "witness_function": f.to_dict()}
            raise OutputNotC0(f"T maps probe {k} outside C0 (tail level {level}: "
                              f"max |Tf| = {tail_max:.3g})", detail)
    if weight_cap is not None and wb.M > weight_cap:
        raise UnboundedWeight(f"max |h| = {wb.M:.3g} exceeds the cap {weight_cap:.3g}",
                              {"M": wb.M, "cap": weight_cap})
    return T


# ---------------------------------------------------------------------------
# injection
# ---------------------------------------------------------------------------

def _lower_bound_lp(A):
    """min over ‖f‖∞ = 1 of ‖Af‖∞, exactly, by one LP per cube face."""
    ny, nx = A.shape
    best, arg = np.inf, None
    c = np.zeros(nx + 1)
    c[-1] = 1.0
    A_ub = np.block([[A, -np.ones((ny, 1))], [-A, -np.ones((ny, 1))]])
    b_ub = np.zeros(2 * ny)
    for j in range(nx):
        bounds = [(-1, 1)] * nx + [(0, None)]
        bounds[j] = (1, 1)
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status == 0 and res.fun < best:
            best, arg = float(res.fun), res.x[:nx]
    return best, arg


def check_injection(T, tol=DEFAULT_TOL, *, lipschitz=DEFAULT_LIPSCHITZ, lp_limit=64):
    """Is T bounded below (‖Tf‖ >= m‖f‖ with m > 0)?

    Weighted compositions are judged structurally: φ continuous, proper and
    onto, and 0 < m <= |h| <= M.  Matrices are judged by their exact lower
    bound min_{‖f‖=1} ‖Tf‖ (an LP per cube face up to ``lp_limit`` columns,
    the rank plus a pseudo-inverse bound beyond).
    """
    if isinstance(T, WeightedComposition):
        sym = T.symbol
        wb = weight_bounds(sym)
        cont = check_continuity(sym, T.domain, T.codomain, lipschitz)
        prop = check_proper(sym, T.domain, T.codomain)
        img = np.unique(sym.phi[sym.phi != INFINITY])
        missing = np.setdiff1d(np.flatnonzero(T.domain.finite_mask), img)
        witnesses = []
        if len(missing):
            x = int(missing[0])
            witnesses.append({"reason": "not_onto", "f": f"e_{x}", "x": x, "Tf_norm": 0.0})
        if not cont:
            witnesses.append({"reason": "discontinuous", **cont.witness})
        if not prop:
            witnesses.append({"reason": "not_proper", **prop.witness})
        if wb.m <= tol.eps_zero:
            y = int(np.argmin(np.abs(sym.h)))
            witnesses.append({"reason": "weight_vanishes", "y": y, "h": float(sym.h[y])})
        ok = not witnesses
        return Report("injection", "injection" if ok else "not_injection", ok, witnesses,
                      {"m": wb.m, "M": wb.M},
                      {"continuous": cont.passed, "proper": prop.passed, "onto": not len(missing)})
    A = T.to_matrix()
    M = float(np.abs(A).sum(axis=1).max()) if A.size else 0.0
    nx = A.shape[1]
    if nx <= lp_limit:
        m, arg = _lower_bound_lp(A)
        method = "lp"
    else:
        rank = np.linalg.matrix_rank(A)
        if rank < nx:
            _, _, vt = np.linalg.svd(A)
            arg = vt[-1] / np.abs(vt[-1]).max()
            m = float(np.abs(A @ arg).max())
        else:
            m = 1.0 / float(np.abs(np.linalg.pinv(A)).sum(axis=1).max())
            arg = None
        method = "pinv"
    ok = m > tol.eps_zero
    w = [] if ok or arg is None else [{"f": np.round(arg, 15).tolist(), "Tf_norm": m}]
    return Report("injection", "injection" if ok else "not_injection", ok, w,
                  {"m": m, "M": M}, {"method": method})


# ---------------------------------------------------------------------------
# isometry
# ---------------------------------------------------------------------------

def isometry_structural(A, eps=0.0):
    """Finite-case isometry test on an (..., ny, nx) stack of matrices.

    ‖Tf‖ <= ‖f‖ for all f iff every row 1-norm is <= 1; given that,
    ‖Tf‖ >= ‖f‖ for all f iff every column x has a pure row (|t_yx| = 1,
    rest of the row zero).
    """
    A = np.asarray(A, dtype=float)
    absA = np.abs(A)
    rown = absA.sum(axis=-1)
    contract = np.all(rown <= 1 + eps, axis=-1)
    pure = (absA >= 1 - eps) & ((rown[..., None] - absA) <= eps)
    covered = np.all(np.any(pure, axis=-2), axis=-1)
    return contract & covered


@functools.lru_cache(maxsize=16)
def face_vertices(n):
    """Nonzero vectors of {−1, 0, 1}^n up to sign (first nonzero entry +1).

    These are the vertices of every face of the unit cube; together they
    witness both ‖Tf‖ <= ‖f‖ (full ±1 vertices) and ‖Tf‖ >= ‖f‖ (the
    coordinate spikes e_x).
    """
    if n == 0:
        return np.empty((0, 0))
    k = np.arange(3 ** n)
    V = (k[:, None] // 3 ** np.arange(n - 1, -1, -1)) % 3 - 1.0
    nz = V != 0
    first = np.argmax(nz, axis=1)
    keep = nz.any(axis=1) & (V[np.arange(len(V)), first] > 0)
    V = V[keep]
    V.setflags(write=False)
    return V


def isometry_definitional(A, eps=0.0, V=None):
    """‖Tv‖∞ == ‖v‖∞ = 1 for every face vertex v, on an (..., ny, nx) stack."""
    A = np.asarray(A, dtype=float)
    nx = A.shape[-1]
    if V is None:
        V = face_vertices(nx)
    TV = np.einsum("...ij,vj->...vi", A, V)
    norms = np.abs(TV).max(axis=-1) if A.shape[-2] else np.zeros(TV.shape[:-1])
    return np.all(np.abs(norms - 1.0) <= eps, axis=-1)


def check_isometry(T, tol=DEFAULT_TOL, *, require_definitional=False):
    """Structural isometry verdict, cross-checked definitionally when |X| <= 12."""
    A = T.to_matrix()
    eps = tol.eps_eq
    structural = bool(isometry_structural(A, eps))
    absA = np.abs(A)
    rown = absA.sum(axis=1)
    witnesses = []
    if not structural:
        bad = np.flatnonzero(rown > 1 + eps)
        if len(bad):
            y = int(bad[0])
            witnesses.append({"reason": "row_norm_exceeds_one", "y": y, "row_norm": float(rown[y]),
                              "f": np.sign(A[y]).tolist()})
        else:
            pure = (absA >= 1 - eps) & ((rown[:, None] - absA) <= eps)
            x = int(np.flatnonzero(~pure.any(axis=0))[0])
            witnesses.append({"reason": "no_pure_row", "x": x, "f": f"e_{x}",
                              "Tf_norm": float(absA[:, x].max()) if A.shape[0] else 0.0})
    nx = A.shape[1]
    definitional = None
    data = {"structural": structural, "rows": A.shape[0], "cols": nx}
    if nx <= MAX_DEFINITIONAL:
        definitional = bool(isometry_definitional(A, eps))
        data["definitional"] = definitional
        data["agree"] = definitional == structural
        if definitional != structural:
            log.warning("isometry verdicts disagree at tolerance %g", eps)
    else:
        data["definitional"] = None
        data["note"] = "definitional check skipped: more than 12 domain samples"
    report = Report("isometry", "isometry" if structural else "not_isometry", structural,
                    witnesses, {"max_row_norm": float(rown.max()) if len(rown) else 0.0}, data)
    if definitional is None and require_definitional:
        raise TooLargeForDefinitionalCheck(f"{nx} domain samples exceed {MAX_DEFINITIONAL}",
                                           report.to_dict())
    return report


def operator_norm(A):
    """‖T‖ for the sup norm: the largest row 1-norm."""
    A = np.asarray(A)
    return float(np.abs(A).sum(axis=-1).max()) if A.size else 0.0


# ---------------------------------------------------------------------------
# disjointness preservation
# ---------------------------------------------------------------------------

def dp_structural(A, eps=0.0):
    """At most one entry with |entry| > eps per row, on an (..., ny, nx) stack."""
    A = np.asarray(A, dtype=float)
    return np.all((np.abs(A) > eps).sum(axis=-1) <= 1, axis=-1)


def dp_definitional(A, eps=0.0):
    """T e_x · T e_x' = 0 for all x != x' (exhaustive pairs), on a stack.

    The products use the scale-invariant disjointness rule
    max|f·g| <= eps · max(‖f‖, ‖g‖).
    """
    A = np.asarray(A, dtype=float)
    nx = A.shape[-1]
    ok = np.ones(A.shape[:-2], dtype=bool)
    if A.shape[-2] == 0:
        return ok
    colnorm = np.abs(A).max(axis=-2)
    for x, xp in itertools.combinations(range(nx), 2):
        prod = np.abs(A[..., :, x] * A[..., :, xp]).max(axis=-1)
        scale = np.maximum(colnorm[..., x], colnorm[..., xp])
        ok &= prod <= eps * scale
    return ok


def _dp_corpus_witness(T, tol, pairs=None, seed=0):
    X = T.domain
    rng = np.random.default_rng(seed)
    fin = np.flatnonzero(X.finite_mask)
    w = 2 * X.mesh
    if pairs is None:
        pairs = []
        for _ in range(64):
            a, b = rng.choice(fin, 2, replace=False)
            if distances_from(X, int(a))[int(b)] >= 2 * w:
                pairs.append((int(a), int(b)))
    for a, b in pairs:
        f, g = hat(X, a, w), hat(X, b, w)
        Tf, Tg = T.apply(f), T.apply(g)
        prod = np.abs(Tf.values * Tg.values)
        scale = max(sup_norm(Tf), sup_norm(Tg))
        if prod.max() > tol.eps_zero * max(scale, 1e-300):
            y = int(np.argmax(prod))
            return {"f": f"hat({a}, {w:.6g})", "g": f"hat({b}, {w:.6g})", "y": y,
                    "TfTg": float(prod[y])}
    return None


def check_disjointness_preserving(T, tol=DEFAULT_TOL, *, definitional=False, pairs=None, seed=0):
    """Structural DP verdict: every row has at most one entry above eps_zero.

    With ``definitional=True`` the verdict is also checked over a corpus of
    disjoint hat pairs (the sampled-continuum tier).
    """
    A = T.to_matrix()
    nnz = (np.abs(A) > tol.eps_zero).sum(axis=1)
    bad = np.flatnonzero(nnz > 1)
    witnesses = []
    if len(bad):
        y = int(bad[0])
        xs = np.flatnonzero(np.abs(A[y]) > tol.eps_zero)[:2]
        witnesses.append({"f": f"e_{int(xs[0])}", "g": f"e_{int(xs[1])}", "y": y,
                          "x": int(xs[0]), "x_prime": int(xs[1]),
                          "TfTg": float(A[y, xs[0]] * A[y, xs[1]])})
    data = {"max_entries_per_row": int(nnz.max()) if len(nnz) else 0}
    if definitional:
        cw = _dp_corpus_witness(T, tol, pairs, seed)
        data["definitional"] = cw is None
        if cw is not None and not witnesses:
            witnesses.append(cw)
    ok = not witnesses
    return Report("dp", "dp" if ok else "not_dp", ok, witnesses, {}, data)
