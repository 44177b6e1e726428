"""Decomposition Y = Y1 ∪ Y2 ∪ Y3 of disjointness-preserving maps.

Y3 collects the rows whose functional vanishes, Y2 the rows whose norm
blows up across a refinement family (the desk-scale stand-in for a
discontinuous δ_y∘T), and Y1 the rest, where Tf(y) = h(y) f(φ(y)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BlowupAmbiguous, NotBijective, NotDP, RecoveryError
from ..funcspace import DEFAULT_TOL, corpus_matrix, probe_corpus, support_masks
from ..operator import (
    INFINITY,
    MatrixOperator,
    Symbol,
    WeightedComposition,
    check_disjointness_preserving,
)
from .support import functional_supports


@dataclass(frozen=True)
class BlowupThresholds:
    """Growth law separating Y2 from bounded rows.

    A row is in Y2 when its log-log growth exponent is >= ``alpha_hi`` and
    its final norm exceeds ``ratio_hi`` times the median bounded norm.  It
    is bounded when the exponent is below ``alpha_lo`` or the ratio is at
    most ``ratio_lo``.  Anything else is ambiguous.
    """

    alpha_hi: float = 0.5
    alpha_lo: float = 0.25
    ratio_hi: float = 10.0
    ratio_lo: float = 2.0


@dataclass
class Decomposition:
    Y1: np.ndarray
    Y2: np.ndarray
    Y3: np.ndarray
    symbol: Symbol
    F: np.ndarray
    blowup_evidence: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "Y1": self.Y1.tolist(),
            "Y2": self.Y2.tolist(),
            "Y3": self.Y3.tolist(),
            "symbol": self.symbol.to_dict(),
            "F": ["inf" if x == INFINITY else int(x) for x in self.F],
            "blowup_evidence": self.blowup_evidence,
            "residuals": self.residuals,
        }


def _row_norms(T, tol, tier, corpus):
    if tier == "discrete":
        return np.abs(T.to_matrix()).sum(axis=1)
    F = corpus_matrix(corpus)
    scale = np.abs(F).max(axis=1)
    TF = T.apply_many(F) / scale[:, None]
    return np.abs(TF).max(axis=0)


def growth_exponents(norms):
    """Least-squares slope of log(norm) against log(k), k = 1..K, per row."""
    K = norms.shape[0]
    if K < 2:
        return np.zeros(norms.shape[1])
    lk = np.log(np.arange(1, K + 1))
    ln = np.log(np.maximum(norms, 1e-300))
    lk_c = lk - lk.mean()
    return (lk_c @ (ln - ln.mean(axis=0))) / (lk_c @ lk_c)


def _cluster(X, pts):
    """Single-link clusters of sample indices at one mesh step; returns list of arrays."""
    pts = np.unique(pts)
    if len(pts) == 0:
        return []
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    P = X.points[pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if np.linalg.norm(P[i] - P[j]) <= X.mesh * (1 + 1e-9):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(pts[i])
    return [np.array(sorted(g)) for g in sorted(groups.values(), key=min)]


def decompose_dp(ops, tol=DEFAULT_TOL, *, thresholds=None, tier="discrete", corpus=None,
                 seed=0, f_cap=None):
    """Y1/Y2/Y3 decomposition of a DP operator or a refinement family T^(1..K).

    The last member of the family is the finest level and carries the
    recovered symbol.  Raises NotDP (with witness) if any level fails the
    structural DP test, BlowupAmbiguous if a row's growth sits between the
    thresholds.
    """
    if not isinstance(ops, (list, tuple)):
        ops = [ops]
    if not ops:
        raise ValueError("need at least one operator")
    thresholds = thresholds or BlowupThresholds()
    T = ops[-1]
    X = T.domain
    for k, op in enumerate(ops, start=1):
        if op.shape != T.shape:
            raise ValueError("refinement levels must share the sample sets")
        rep = check_disjointness_preserving(op, tol)
        if not rep:
            raise NotDP(f"level {k} is not disjointness preserving", rep.to_dict())
    if corpus is None:
        corpus = probe_corpus(X, tol, seed)
    norms = np.vstack([_row_norms(op, tol, tier, corpus) for op in ops])
    final = norms[-1]
    ny = T.shape[0]
    in3 = final <= tol.eps_zero
    alpha = growth_exponents(norms)
    in2 = np.zeros(ny, dtype=bool)
    evidence = {}
    if len(ops) >= 2:
        live = ~in3
        calm = live & (alpha < thresholds.alpha_hi)
        ref = final[calm] if calm.any() else final[live]
        median = float(np.median(ref)) if len(ref) else 0.0
        ratio = final / median if median > 0 else np.full(ny, np.inf)
        grow = live & (alpha >= thresholds.alpha_hi) & (ratio > thresholds.ratio_hi)
        bounded = ~live | (alpha < thresholds.alpha_lo) | (ratio <= thresholds.ratio_lo)
        unclear = np.flatnonzero(~grow & ~bounded)
        if len(unclear):
            y = int(unclear[0])
            raise BlowupAmbiguous(f"row {y}: growth exponent {alpha[y]:.3g}, ratio {ratio[y]:.3g}",
                                  {"rows": unclear.tolist(), "alpha": alpha[unclear].tolist(),
                                   "ratio": ratio[unclear].tolist()})
        in2 = grow
        for y in np.flatnonzero(in2):
            evidence[str(int(y))] = {"norms": norms[:, y].tolist(), "alpha": float(alpha[y]),
                                     "ratio_to_median": float(ratio[y])}
    in1 = ~in2 & ~in3
    Y1, Y2, Y3 = (np.flatnonzero(m) for m in (in1, in2, in3))
    live_rows = np.flatnonzero(in1 | in2)
    supports = functional_supports(T, live_rows, tol)
    phi = np.empty(len(live_rows), dtype=np.int64)
    for k, fs in enumerate(supports):
        if not fs.singleton:
            raise RecoveryError(f"supp(δ_{fs.y}∘T) = {fs.candidates} is not a singleton",
                                fs.to_dict())
        phi[k] = fs.point
    A = T.to_matrix()
    h = np.array([A[y, x] if x != INFINITY else 0.0 for y, x in zip(live_rows, phi)])
    sym = Symbol(phi, h, live_rows)
    if np.any(np.abs(h[in1[live_rows]]) <= tol.eps_zero):
        raise RecoveryError("h vanishes on Y1")

    # image trajectories of the blow-up rows across levels
    images = {}
    for y in Y2:
        traj = []
        for op in ops:
            r = np.abs(op.to_matrix()[y])
            traj.append(int(np.argmax(r)) if r.max() > tol.eps_zero else None)
        images[int(y)] = traj
        evidence[str(int(y))]["images"] = traj
    y2_img = phi[np.isin(live_rows, Y2)]
    clusters = _cluster(X, y2_img[y2_img != INFINITY])
    for c in clusters:
        if len(c) > 1 and np.ptp(X.points[c], axis=0).max() > X.mesh * (1 + 1e-9):
            raise RecoveryError("blow-up images do not cluster within one mesh step",
                                {"cluster": c.tolist()})
    F = np.array([int(c[0]) for c in clusters] + ([INFINITY] if np.any(y2_img == INFINITY) else []),
                 dtype=np.int64)
    cap = len(ops) if f_cap is None else f_cap
    if len(F) > max(cap, 0) and len(Y2):
        raise RecoveryError(f"|F| = {len(F)} exceeds the cap {cap}", {"F": F.tolist()})

    # verify the representation on the corpus at the finest level
    Fm = corpus_matrix(corpus)
    TF = T.apply_many(Fm)
    res = {}
    sel1 = np.isin(live_rows, Y1)
    if sel1.any():
        r1, p1, h1 = live_rows[sel1], phi[sel1], h[sel1]
        res["representation"] = float(np.abs(TF[:, r1] - h1[None, :] * Fm[:, p1]).max())
    else:
        res["representation"] = 0.0
    res["y3_annihilation"] = float(np.abs(TF[:, Y3]).max()) if len(Y3) and len(Fm) else 0.0
    S = support_masks(corpus, tol)
    fin = phi != INFINITY
    outside = ~S[:, phi[fin]]
    vals = np.abs(TF[:, live_rows[fin]])
    res["eq2_violation"] = float(vals[outside].max()) if outside.any() else 0.0
    if res["representation"] > tol.eps_eq:
        raise RecoveryError(f"representation residual {res['representation']:.3g} on Y1", res)
    if res["y3_annihilation"] > tol.eps_zero:
        raise RecoveryError("Y3 rows do not annihilate the corpus", res)
    if res["eq2_violation"] > tol.eps_zero:
        raise RecoveryError("Tf(y) != 0 although φ(y) lies outside supp f", res)
    res["growth_exponents"] = {str(int(y)): float(alpha[y]) for y in Y2}
    return Decomposition(Y1, Y2, Y3, sym, F, evidence, res)


@dataclass
class BijectiveRecovery:
    symbol: Symbol
    inverse: Symbol

    def __iter__(self):
        return iter((self.symbol, self.inverse))

    def to_dict(self):
        return {"symbol": self.symbol.to_dict(), "inverse": self.inverse.to_dict()}


def recover_bijective_dp(T, tol=DEFAULT_TOL):
    """Write a bijective DP matrix as a weighted permutation and invert it.

    Returns (symbol, inverse) with T⁻¹g = h₁·g∘φ₁, φ₁ = φ⁻¹ and
    h₁(x) = 1/h(φ⁻¹(x)).
    """
    A = T.to_matrix()
    ny, nx = A.shape
    if ny != nx:
        raise NotBijective(f"matrix is {ny}x{nx}, not square")
    rep = check_disjointness_preserving(T, tol)
    if not rep:
        raise NotDP("operator is not disjointness preserving", rep.to_dict())
    nz = np.abs(A) > tol.eps_zero
    empty = np.flatnonzero(~nz.any(axis=1))
    if len(empty):
        raise NotBijective(f"row {int(empty[0])} vanishes (Y3 nonempty)", {"Y3": empty.tolist()})
    phi = np.argmax(nz, axis=1)
    if len(np.unique(phi)) != nx:
        hit = np.bincount(phi, minlength=nx)
        raise NotBijective("φ is not a bijection of the sample sets",
                           {"missed": np.flatnonzero(hit == 0).tolist()})
    dec = decompose_dp(T, tol)
    if len(dec.Y2) or len(dec.Y3):
        raise NotBijective("Y2 ∪ Y3 is nonempty", dec.to_dict())
    h = A[np.arange(ny), phi]
    phi1 = np.empty(nx, dtype=np.int64)
    phi1[phi] = np.arange(ny)
    h1 = 1.0 / h[phi1]
    return BijectiveRecovery(Symbol(phi, h), Symbol(phi1, h1))


def inverse_operator(T, inverse):
    """Weighted composition C0(Y) → C0(X) of a recovered inverse symbol."""
    return WeightedComposition(T.codomain, T.domain, inverse)


def as_matrix_operator(T):
    return T if isinstance(T, MatrixOperator) else MatrixOperator(T.domain, T.codomain, T.to_matrix())
