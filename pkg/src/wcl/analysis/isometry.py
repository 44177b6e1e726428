"""Symbol recovery for into-isometries and the quotient/open-map checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import EmptyPeakSet, NotIsometry, RecoveryError
from ..funcspace import DEFAULT_TOL, corpus_matrix, hat, probe_corpus, support_masks
from ..operator import (
    DEFAULT_LIPSCHITZ,
    INFINITY,
    Report,
    Symbol,
    check_continuity,
    check_isometry,
    check_proper,
)
from .support import functional_supports

PEAK_WIDTHS = (4, 2, 1)


@dataclass(frozen=True)
class PeakSets:
    """Q_x for every domain sample x, as sorted index arrays."""

    sets: tuple

    def __getitem__(self, x):
        return self.sets[x]

    def __len__(self):
        return len(self.sets)

    def union(self):
        if not self.sets:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(self.sets))

    def pairwise_disjoint(self):
        allq = np.concatenate(self.sets) if self.sets else np.empty(0)
        return len(allq) == len(np.unique(allq))

    def to_dict(self):
        return {str(x): q.tolist() for x, q in enumerate(self.sets)}


@dataclass
class IsometryRecovery:
    peak_sets: PeakSets
    Y1: np.ndarray
    symbol: Symbol
    residual: float
    eq1_violation: float
    tier: str

    def __iter__(self):
        return iter((self.peak_sets, self.Y1, self.symbol))

    def to_dict(self):
        return {
            "tier": self.tier,
            "Y1": self.Y1.tolist(),
            "symbol": self.symbol.to_dict(),
            "peak_sets": self.peak_sets.to_dict(),
            "residual": self.residual,
            "eq1_violation": self.eq1_violation,
        }


def _peak_mask_discrete(A, eps):
    """y ∈ Q_x by the adversarial-vertex test.

    |row·e_x| = 1 and |row·(e_x + Σ_{x'≠x} sign(t_yx') e_x')| = 1, where the
    second vector is the cube vertex that agrees with the row's signs off x.
    """
    absA = np.abs(A)
    off = absA.sum(axis=1, keepdims=True) - absA
    v1 = absA
    v2 = np.abs(A + off)
    return (np.abs(v1 - 1) <= eps) & (np.abs(v2 - 1) <= eps)


def _peak_mask_continuum(T, eps, widths=PEAK_WIDTHS):
    """y ∈ Q_x when every peak in S_x of the given widths has |Tf(y)| >= 1 - eps."""
    X = T.domain
    fin = np.flatnonzero(X.finite_mask)
    mask = np.ones(T.shape, dtype=bool)
    for w in widths:
        P = np.zeros((X.size, X.size))
        for x in fin:
            P[x] = hat(X, int(x), w * X.mesh).values
        vals = T.apply_many(P)  # (|X|, |Y|)
        mask &= (np.abs(vals) >= 1 - eps).T
    mask[:, ~X.finite_mask] = False
    return mask


def recover_isometry(T, tol=DEFAULT_TOL, *, tier="discrete", corpus=None, seed=0):
    """Recover (Q_x, Y1, φ, h) with Tf|Y1 = h·f∘φ for an into-isometry T.

    ``tier="discrete"`` uses the adversarial-vertex peak test, ``"continuum"``
    peak hats of widths 4, 2, 1 mesh.  The representation is then verified
    on a probe corpus: reconstruction residual <= eps_eq, and
    φ(y) ∉ supp(f) ⟹ |Tf(y)| <= eps_zero.
    """
    iso = check_isometry(T, tol)
    if not iso:
        raise NotIsometry("operator is not an into-isometry", iso.to_dict())
    A = T.to_matrix()
    X = T.domain
    if tier == "discrete":
        mask = _peak_mask_discrete(A, tol.eps_eq)
    elif tier == "continuum":
        mask = _peak_mask_continuum(T, tol.eps_eq)
    else:
        raise ValueError(f"unknown tier {tier!r}")
    sets = tuple(np.flatnonzero(mask[:, x]) for x in range(X.size))
    peaks = PeakSets(sets)
    for x in np.flatnonzero(X.finite_mask):
        if len(sets[x]) == 0:
            raise EmptyPeakSet(f"Q_{x} is empty", {"x": int(x)})
    if not peaks.pairwise_disjoint():
        raise RecoveryError("peak sets overlap", {"counts": mask.sum(axis=1).tolist()})
    Y1 = peaks.union()
    owner = np.full(A.shape[0], -1, dtype=np.int64)
    for x, q in enumerate(sets):
        owner[q] = x
    supports = functional_supports(T, Y1, tol)
    phi = np.empty(len(Y1), dtype=np.int64)
    for k, fs in enumerate(supports):
        if not fs.singleton or fs.point != owner[fs.y]:
            raise RecoveryError(f"supp(δ_{fs.y}∘T) = {fs.candidates} disagrees with its peak set",
                                fs.to_dict())
        phi[k] = fs.point
    # h(y) = Tf(y)·sign(f(φ(y))) for the narrowest peak f at φ(y)
    h = np.empty(len(Y1))
    for k, (y, x) in enumerate(zip(Y1, phi)):
        f = hat(X, int(x), X.mesh)
        h[k] = (A[y] @ f.values) * np.sign(f.values[x])
    if np.any(np.abs(np.abs(h) - 1) > tol.eps_eq):
        raise RecoveryError("recovered weight is not unimodular", {"h": h.tolist()})
    sym = Symbol(phi, h, Y1)
    residual, eq1 = representation_residuals(T, sym, tol, corpus=corpus, seed=seed)
    if residual > tol.eps_eq:
        raise RecoveryError(f"reconstruction residual {residual:.3g} exceeds eps_eq",
                            {"residual": residual})
    if eq1 > tol.eps_zero:
        raise RecoveryError(f"Tf(y) = {eq1:.3g} although φ(y) lies outside supp f",
                            {"eq1_violation": eq1})
    return IsometryRecovery(peaks, Y1, sym, residual, eq1, tier)


def representation_residuals(T, sym, tol=DEFAULT_TOL, *, corpus=None, seed=0):
    """(max |Tf(y) - h(y) f(φ(y))|, max |Tf(y)| with φ(y) ∉ supp f) over a corpus.

    Only rows of ``sym`` with a finite φ are checked.
    """
    X = T.domain
    if corpus is None:
        corpus = probe_corpus(X, tol, seed)
    F = corpus_matrix(corpus)
    TF = T.apply_many(F)
    rows = sym.row_indices(T.shape[0])
    ok = sym.phi != INFINITY
    rows, phi, h = rows[ok], sym.phi[ok], sym.h[ok]
    if len(rows) == 0:
        return 0.0, 0.0
    pred = h[None, :] * F[:, phi]
    residual = float(np.abs(TF[:, rows] - pred).max())
    S = support_masks(corpus, tol)
    outside = ~S[:, phi]
    eq1 = float(np.abs(TF[:, rows])[outside].max()) if outside.any() else 0.0
    return residual, eq1


def check_quotient(sym, X, Y, *, lipschitz=DEFAULT_LIPSCHITZ):
    """φ: Y1 → X is a quotient map when it is onto, continuous and proper."""
    img = np.unique(sym.phi[sym.phi != INFINITY])
    missing = np.setdiff1d(np.flatnonzero(X.finite_mask), img)
    cont = check_continuity(sym, X, Y, lipschitz)
    prop = check_proper(sym, X, Y)
    witnesses = []
    if len(missing):
        witnesses.append({"reason": "not_onto", "missing": missing[:16].tolist(),
                          "n_missing": int(len(missing))})
    if not cont:
        witnesses.append({"reason": "discontinuous", **cont.witness})
    if not prop:
        witnesses.append({"reason": "not_proper", **prop.witness})
    ok = not witnesses
    return Report("quotient", "quotient" if ok else "not_quotient", ok, witnesses,
                  {"max_lipschitz_ratio": cont.residuals.get("max_ratio", 0.0)},
                  {"onto": not len(missing), "continuous": cont.passed, "proper": prop.passed})


def _interior_radius(S, members, idx):
    """Distance from each sample in ``idx`` to the nearest sample of S outside ``members``."""
    inside = np.zeros(S.size, dtype=bool)
    inside[members] = True
    out = np.flatnonzero(~inside & S.finite_mask)
    if len(out) == 0:
        return np.full(len(idx), np.inf)
    d, _ = cKDTree(S.points[out]).query(S.points[idx])
    return d


def check_open_map(sym, X, Y, O, *, depth=4):
    """Look for a witness that φ is not open on the (relatively open) set O ⊆ Y.

    A sample o ∈ O sitting at least ``depth`` mesh steps inside O whose
    image φ(o) is within one mesh step of the complement of φ(O) shows that
    φ(O) is not a neighbourhood of φ(o) although O is one of o.
    """
    O = np.unique(np.asarray(O, dtype=np.int64))
    rows = sym.row_indices(Y.size)
    where = np.full(Y.size, -1, dtype=np.int64)
    where[rows] = np.arange(len(rows))
    O = O[where[O] >= 0]
    img = sym.phi[where[O]]
    img_set = np.unique(img[img != INFINITY])
    rho_O = _interior_radius(Y, O, O)
    rho_img = np.full(len(O), np.inf)
    fin = img != INFINITY
    rho_img[fin] = _interior_radius(X, img_set, img[fin])
    bad = np.flatnonzero((rho_O >= depth * Y.mesh * (1 - 1e-9)) & (rho_img <= X.mesh * (1 + 1e-9)))
    if len(bad) == 0:
        return Report("open_map", "no_witness", True,
                      residuals={"min_image_radius": float(rho_img.min()) if len(O) else 0.0})
    k = int(bad[np.argmax(rho_O[bad])])
    w = {"o": int(O[k]), "o_point": Y.points[O[k]].tolist(), "interior_radius_in_O": float(rho_O[k]),
         "phi_o": int(img[k]), "phi_o_point": X.points[img[k]].tolist(),
         "interior_radius_of_image": float(rho_img[k]),
         "image_bounds": [X.points[img_set].min(axis=0).tolist(),
                          X.points[img_set].max(axis=0).tolist()]}
    return Report("open_map", "not_open", False, [w])
