"""Extension of a weighted composition to the one-point compactifications.

Given T = h·f∘φ from C0(X) to C0(Y), any bounded extension T_∞ from C(X_∞)
to C(Y_∞) satisfies T_∞1(y) = lim_n Tf_n(y) + g(y), where f_n are the
tents and g(y) is the mass the functional δ_y∘T_∞ puts on ∞.  The mode
(isometric or disjointness preserving) constrains g; continuity of T_∞1
at ∞ then forces the per-tail limits of T_∞1 to agree.  When they cannot,
the report carries an obstruction certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import GridTooCoarse, InvalidSpec, ModeCheckFailed, NotProper
from ..funcspace import DEFAULT_TOL, C0Tolerance, hat, max_tent, tent
from ..operator import (
    INFINITY,
    Symbol,
    WeightedComposition,
    check_disjointness_preserving,
    check_isometry,
    check_proper,
)
from ..space import compactify, tail_points

MODES = ("isometric", "dp")


def _sig(v, digits=12):
    """Round to ``digits`` significant digits (None passes through)."""
    if v is None:
        return None
    v = float(v)
    if v == 0:
        return 0.0
    if not math.isfinite(v):
        return v
    return float(f"{v:.{digits}g}")


@dataclass
class TentLimits:
    """Per-sample limits of Tf_n(y) along n = 1, 2, 4, ...

    ``limit[y]`` is lim Tf_n(y) (NaN where undetermined); ``forced[y]`` is
    Tf_{2n}(y) for the first n with Tf_n(y) != 0 (NaN where no such n).
    """

    ns: np.ndarray
    values: np.ndarray
    limit: np.ndarray
    forced: np.ndarray

    @property
    def determined(self):
        return ~np.isnan(self.limit)

    @property
    def forced_mask(self):
        return ~np.isnan(self.forced)


def tent_limits(T, tol=DEFAULT_TOL):
    """Tent-doubling limits of Tf_n(y).

    Per y, the sequence starts at the first n whose tent reaches φ(y)
    (f_n(φ(y)) > 0) and stops at the first doubling that moves the value
    by less than eps_eq/10.  Samples never reaching that point stay
    undetermined; on a truncated model these are the ones with φ(y) beyond
    the largest available plateau.
    """
    X = T.domain
    top = max_tent(X)
    if top < 1:
        raise GridTooCoarse("domain too small for a single tent")
    ns = [1]
    while ns[-1] * 2 <= top:
        ns.append(ns[-1] * 2)
    ns = np.array(ns)
    F = np.vstack([tent(int(n), X).values for n in ns])
    V = T.apply_many(F)  # (k, |Y|)
    ny = V.shape[1]
    phi = T.symbol.phi
    reach = np.zeros_like(V, dtype=bool)
    fin = phi != INFINITY
    reach[:, fin] = F[:, phi[fin]] > 0
    limit = np.full(ny, np.nan)
    forced = np.full(ny, np.nan)
    step = np.abs(np.diff(V, axis=0)) < tol.eps_eq / 10
    ok = step & reach[:-1]
    for y in range(ny):
        k = np.flatnonzero(ok[:, y])
        if len(k):
            limit[y] = V[k[0] + 1, y]
        nz = np.flatnonzero(np.abs(V[:-1, y]) > tol.eps_zero)
        if len(nz):
            forced[y] = V[nz[0] + 1, y]
    return TentLimits(ns, V, limit, forced)


@dataclass
class ExtensionReport:
    mode: str
    verdict: str
    certificate: dict
    extension: dict | None = None
    checks: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    operator: object = None

    @property
    def extendable(self):
        return self.verdict == "extendable"

    @property
    def obstructed(self):
        return self.verdict == "obstructed"

    def to_dict(self):
        out = {"mode": self.mode, "verdict": self.verdict, "certificate": self.certificate}
        if self.extension is not None:
            out["extension"] = self.extension
        if self.checks:
            out["checks"] = self.checks
        return out


def _intervals(mode, lim, tol):
    """Admissible range [lo, hi] of T_∞1(y) per sample (NaN = unconstrained)."""
    ny = len(lim.limit)
    lo = np.full(ny, np.nan)
    hi = np.full(ny, np.nan)
    mid = np.full(ny, np.nan)
    if mode == "isometric":
        d = lim.determined
        L = lim.limit[d]
        slack = np.maximum(1 - np.abs(L), 0.0)
        lo[d], hi[d], mid[d] = L - slack, L + slack, L
    else:
        d = lim.forced_mask
        lo[d] = hi[d] = mid[d] = lim.forced[d]
    return lo, hi, mid


def _tail_limits(Y, lo, hi, mid):
    out = {}
    for label, idx in Y.tails.items():
        known = idx[~np.isnan(mid[idx])]
        if len(known) == 0:
            continue
        y = int(known[-1])
        out[label] = {"sample": y, "at": Y.points[y].tolist(), "value": float(mid[y]),
                      "interval": [float(lo[y]), float(hi[y])]}
    return out


def _g_bound(mode, lim, tol):
    if mode == "isometric":
        L = lim.limit[lim.determined]
        sat = np.abs(L) >= 1 - tol.eps_eq
        return float(np.max(np.maximum(1 - np.abs(L[sat]), 0.0))) if sat.any() else None
    both = lim.forced_mask & lim.determined
    if not both.any():
        return None
    return float(np.abs(lim.forced[both] - lim.limit[both]).max())


def compactified_operator(T, h_inf):
    """The weighted composition on X_∞, Y_∞ with φ_∞(∞) = ∞ and h_∞(∞) = h_inf."""
    Xc, Yc = compactify(T.domain), compactify(T.codomain)
    sym = T.symbol
    phi = np.concatenate([sym.phi, [Xc.infinity_index]])
    h = np.concatenate([sym.h, [h_inf]])
    return WeightedComposition(Xc, Yc, Symbol(phi, h))


def _mode_check(T, mode, tol):
    if mode == "isometric":
        return check_isometry(T, tol)
    return check_disjointness_preserving(T, tol)


def attempt_extension(T, mode, tol=DEFAULT_TOL):
    """Decide whether T extends to X_∞ → Y_∞ as an operator of the same type.

    Verdicts: ``obstructed`` when the admissible tail limits of T_∞1 are
    separated by more than eps_tail; ``extendable`` when the tail limits of
    h agree within eps_tail and the compactified operator passes the mode's
    checker; ``inconclusive`` otherwise (limits differ but the admissible
    ranges overlap, or the candidate extension fails its check).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not isinstance(T, WeightedComposition):
        raise InvalidSpec("extension analysis needs a weighted composition operator")
    X, Y = T.domain, T.codomain
    if X.is_compact_model or Y.is_compact_model:
        raise InvalidSpec("extension analysis needs noncompact models")
    prop = check_proper(T.symbol, X, Y)
    if not prop:
        raise NotProper("extension analysis requires a proper φ", prop.to_dict())
    pre = _mode_check(T, mode, tol)
    if not pre:
        raise ModeCheckFailed(f"operator fails the {mode} check", pre.to_dict())

    lim = tent_limits(T, tol)
    lo, hi, mid = _intervals(mode, lim, tol)
    tails = _tail_limits(Y, lo, hi, mid)
    if tails:
        mids = [t["value"] for t in tails.values()]
        limit_gap = max(mids) - min(mids)
        interval_gap = max(t["interval"][0] for t in tails.values()) - \
            min(t["interval"][1] for t in tails.values())
        common = float(np.mean(mids))
    else:
        limit_gap = interval_gap = 0.0
        common = 0.0
    cert = {
        "h_tail_limits": {k: _sig(v["value"]) for k, v in tails.items()},
        "g_bound": _sig(_g_bound(mode, lim, tol)),
        "limit_gap": _sig(limit_gap),
        "interval_gap": _sig(interval_gap),
        "tails": {k: {"sample": v["sample"], "at": [_sig(c) for c in v["at"]],
                      "interval": [_sig(c) for c in v["interval"]]} for k, v in tails.items()},
        "tent_ns": lim.ns.tolist(),
    }
    series = {"limit": lim.limit, "forced": lim.forced, "lo": lo, "hi": hi}
    checks = {"proper": True, "input_mode_check": True}
    if interval_gap > tol.eps_tail:
        return ExtensionReport(mode, "obstructed", cert, None, checks, series)
    if limit_gap > tol.eps_tail:
        cert["reason"] = "tail limits differ but the admissible ranges overlap"
        return ExtensionReport(mode, "inconclusive", cert, None, checks, series)

    # continuity of h at ∞ on the deepest tail level of Y
    deep = tail_points(Y, Y.tail_levels[-1])
    drift = float(np.abs(T.symbol.h[deep] - common).max()) if len(deep) else 0.0
    checks["h_drift_at_infinity"] = _sig(drift)
    Tc = compactified_operator(T, common)
    rep = _mode_check(Tc, mode, tol)
    checks["extended_mode_check"] = rep.passed
    ext = {"domain_id": Tc.domain.name, "codomain_id": Tc.codomain.name,
           "h_inf": _sig(common), "phi_inf": "inf", "symbol": Tc.symbol.to_dict()}
    if drift > tol.eps_tail:
        cert["reason"] = "h does not settle at its tail limit on the outermost level"
        return ExtensionReport(mode, "inconclusive", cert, None, checks, series)
    if not rep:
        cert["reason"] = "the compactified operator fails the mode check"
        checks["extended_report"] = rep.to_dict()
        return ExtensionReport(mode, "inconclusive", cert, None, checks, series)
    return ExtensionReport(mode, "extendable", cert, ext, checks, series, Tc)


# ---------------------------------------------------------------------------
# the worked numerics of the half-line/line example
# ---------------------------------------------------------------------------

def limit_polynomial(h_plus, h_minus):
    """Coefficients of (L - h+)(L - h-), the limit of g(y)g(-y) as a polynomial in L."""
    return np.array([1.0, -(h_plus + h_minus), h_plus * h_minus])


def contradiction_margin(h_plus, h_minus):
    """By how much the forced common limit L violates |g| <= 1.

    g tends to L - h+ on one tail and L - h- on the other; the mirror
    identity leaves only the roots L = h+ and L = h-.  The margin is the
    smallest, over roots, of max(|L - h+|, |L - h-|) - 1; a positive
    margin is a contradiction, a non-positive one a feasible limit.
    """
    roots = np.roots(limit_polynomial(h_plus, h_minus))
    roots = np.real(roots[np.abs(np.imag(roots)) < 1e-12]) if len(roots) else np.array([])
    per_root = [max(abs(L - h_plus), abs(L - h_minus)) - 1 for L in roots]
    return float(min(per_root)), roots, per_root


def mirror_product_test(T, lim, at, *, delta=0.5, grid=5):
    """Norm defect of T_∞(1 + δf) for candidate atoms g(y0) = a, g(-y0) = b.

    ``f`` is the narrowest peak at φ(y0).  The defect is
    (1 + δ) - ‖T_∞1 + δTf‖ over the two mirrored samples; an isometric
    extension needs it to vanish.  Returns the largest defect among pairs
    with ab = 0 and the smallest ratio defect / min(|a|, |b|) among pairs
    with ab != 0.
    """
    X, Y = T.domain, T.codomain
    y0, ym = at
    x0 = int(T.symbol.phi[y0])
    Tf = T.apply(hat(X, x0, X.mesh)).values
    La, Lb = lim.limit[y0], lim.limit[ym]
    A = np.linspace(-1.0, 0.0, grid) if La > 0 else np.linspace(0.0, 1.0, grid)
    B = np.linspace(0.0, 1.0, grid) if Lb < 0 else np.linspace(-1.0, 0.0, grid)
    zero_defect, ratio = 0.0, np.inf
    for a in A:
        for b in B:
            v0 = La + a + delta * Tf[y0]
            v1 = Lb + b + delta * Tf[ym]
            defect = (1 + delta) - max(abs(v0), abs(v1))
            if a == 0 or b == 0:
                zero_defect = max(zero_defect, abs(defect))
            else:
                ratio = min(ratio, defect / min(abs(a), abs(b)))
    return zero_defect, ratio


def reproduce_example9_numerics(R=50.0, n=2000, *, h=None, tol=None, depth=2.5, pairs=8):
    """Scripted check of the obstruction chain on the half-line/line example.

    Builds the operator (optionally with a replacement weight ``h``),
    computes the tent limits, the sign constraints on g from ‖T_∞1‖ = 1,
    the mirror-product defect test, and the contradiction margin of the
    limit identity.  Requires R >= 50 and n >= 2000.
    """
    from ..models import example9_operator

    if R < 50 or n < 2000:
        raise GridTooCoarse(f"need R >= 50 and n >= 2000, got R={R}, n={n}")
    tol = C0Tolerance.continuum() if tol is None else tol
    T = example9_operator(R, n, h=h)
    Y = T.codomain
    y = Y.coords
    lim = tent_limits(T, tol)
    d = lim.determined
    Lam = lim.limit
    g_lo = np.maximum(-1.0, -1.0 - Lam)
    g_hi = np.minimum(1.0, 1.0 - Lam)
    right = d & (y > depth)
    left = d & (y < -depth)
    tails = {}
    for label, idx in Y.tails.items():
        known = idx[d[idx]]
        if len(known):
            tails[label] = float(Lam[known[-1]])
    h_plus, h_minus = tails.get("+∞", 0.0), tails.get("−∞", 0.0)
    margin, roots, per_root = contradiction_margin(h_plus, h_minus)

    # mirrored sample pairs (y0, -y0) with y0 beyond the depth, both determined
    cand = np.flatnonzero(right)
    mirror = {}
    if len(cand):
        for y0 in cand[np.linspace(0, len(cand) - 1, min(pairs, len(cand))).astype(int)]:
            j = int(np.argmin(np.abs(y + y[y0])))
            if abs(y[j] + y[y0]) < 1e-9 * max(1.0, R) and d[j]:
                mirror[int(y0)] = j
    zero_defect, ratio = 0.0, np.inf
    sat_pairs = 0
    for y0, ym in mirror.items():
        if abs(abs(Lam[y0]) - 1) > tol.eps_eq or abs(abs(Lam[ym]) - 1) > tol.eps_eq:
            continue
        if np.sign(Lam[y0]) == np.sign(Lam[ym]):
            continue
        sat_pairs += 1
        zd, r = mirror_product_test(T, lim, (y0, ym))
        zero_defect = max(zero_defect, zd)
        ratio = min(ratio, r)
    feasible = margin <= 0
    report = {
        "grid": {"R": R, "n": n, "mesh": Y.mesh},
        "h_tail_limits": {"+∞": _sig(h_plus), "−∞": _sig(h_minus)},
        "determined_samples": int(d.sum()),
        "sign_constraints": {
            "max_g_upper_right": _sig(float(g_hi[right].max())) if right.any() else None,
            "min_g_lower_left": _sig(float(g_lo[left].min())) if left.any() else None,
            "g_nonpositive_right": bool(right.any() and g_hi[right].max() <= tol.eps_eq),
            "g_nonnegative_left": bool(left.any() and g_lo[left].min() >= -tol.eps_eq),
        },
        "mirror_product": {
            "pairs_tested": sat_pairs,
            "max_defect_when_product_zero": _sig(zero_defect),
            "min_defect_ratio_when_product_nonzero": None if not math.isfinite(ratio) else _sig(ratio),
        },
        "limit_polynomial": [_sig(c) for c in limit_polynomial(h_plus, h_minus)],
        "roots": [_sig(r) for r in roots],
        "margin_per_root": [_sig(m) for m in per_root],
        "contradiction_margin": _sig(margin),
        "margins_L_pm_1": {"|L-1|": [_sig(abs(r - 1)) for r in roots],
                           "|L+1|": [_sig(abs(r + 1)) for r in roots]},
        "verdict": "feasible" if feasible else "contradiction",
    }
    if feasible:
        report["feasible_g"] = "g ≡ 0" if abs(h_plus - h_minus) <= tol.eps_tail else "g → L - h±"
    return report
