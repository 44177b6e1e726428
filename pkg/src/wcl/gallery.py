"""Golden reports for the worked examples.

Each entry builds its operator(s), runs the relevant checks and returns a
mapping ``file name -> JSON document``.  Output depends only on the
configuration and seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import models
from .analysis import (
    attempt_extension,
    check_open_map,
    check_quotient,
    decompose_dp,
    recover_isometry,
    reproduce_example9_numerics,
)
from .config import RunConfig
from .errors import WclError
from .funcspace import C0Tolerance, probe_corpus
from .operator import (
    build_weighted_composition,
    check_disjointness_preserving,
    check_injection,
    check_isometry,
    check_proper,
)
from .serialize import write_json

NAMES = ("example5", "example6", "example9", "lemma3-counterexamples")


def _corpus(X, tol, cfg):
    return probe_corpus(X, tol, cfg.corpus.seed, n_random=cfg.corpus.size // 2)


def example5(cfg):
    tol = C0Tolerance.discrete(cfg.tolerance.eps_tail)
    T = models.example5_operator(20.0, 400)
    X, Y = T.domain, T.codomain
    rec = recover_isometry(T, tol, corpus=_corpus(X, tol, cfg), seed=cfg.corpus.seed)
    expected = models.example5_expected_y1(Y)
    phi_err = float(np.abs(X.points[rec.symbol.phi, 0] - Y.coords[rec.Y1]).max())
    summary = {
        "grid": {"R": 20.0, "n": 400, "mesh": X.mesh},
        "isometry": check_isometry(T, tol).to_dict(),
        "Y1_count": int(len(rec.Y1)),
        "Y1_range": [float(Y.coords[rec.Y1].min()), float(Y.coords[rec.Y1].max())],
        "Y1_equals_nonnegative_samples": bool(np.array_equal(rec.Y1, expected)),
        "phi_max_offset": phi_err,
        "h_max_deviation_from_1": float(np.abs(rec.symbol.h - 1).max()),
        "residual": rec.residual,
        "eq1_violation": rec.eq1_violation,
        "excluded_rows": {
            "negative_axis": int(np.sum(Y.coords < 0) - 1),
            "markers": sorted(Y.markers),
        },
        "quotient": check_quotient(rec.symbol, X, Y).to_dict(),
        "observation": "Y1 is the closed half [0, R] of the sampled line minus the +∞ "
                       "marker; closure properties in the extended line are not computed",
    }
    return {"report.json": summary, "recovery.json": rec.to_dict()}


def example6(cfg):
    tol = C0Tolerance.discrete(cfg.tolerance.eps_tail)
    X, Y = models.example6_spaces(10.0, 200)
    sym = models.example6_symbol(X, Y)
    T = build_weighted_composition(X, Y, sym, tol, lipschitz=cfg.tolerance.lipschitz,
                                   corpus=_corpus(X, tol, cfg))
    O = models.example6_open_set(Y)
    report = {
        "grid": {"R": 10.0, "n": 200, "mesh": X.mesh, "codomain_samples": Y.size},
        "build": "accepted",
        "isometry": check_isometry(T, tol).to_dict(),
        "injection": check_injection(T, tol).to_dict(),
        "quotient": check_quotient(sym, X, Y, lipschitz=cfg.tolerance.lipschitz).to_dict(),
        "open_map": check_open_map(sym, X, Y, O).to_dict(),
        "open_set": {"size": int(len(O)), "description": "0 <= u1 < 1, 0 < u2 <= 1"},
    }
    return {"report.json": report}


def example9(cfg):
    R, n = cfg.grid.R, cfg.grid.n
    tol = C0Tolerance.continuum(cfg.tolerance.eps_tail)
    X, Y = models.example9_spaces(R, n)
    T = models.example9_operator(R, n, tol=tol)
    T = build_weighted_composition(X, Y, T.symbol, tol, corpus=_corpus(X, tol, cfg))
    dtol = C0Tolerance.discrete(cfg.tolerance.eps_tail)
    dec = decompose_dp(T, dtol, corpus=_corpus(X, dtol, cfg))
    y = Y.coords
    y1 = dec.symbol.rows
    h_err = float(np.abs(dec.symbol.h - models.example9_h(y[y1])).max())
    checks = {
        "grid": {"R": R, "n": n, "mesh": X.mesh},
        "isometry": check_isometry(T, tol).to_dict(),
        "dp": check_disjointness_preserving(T, tol).to_dict(),
        "proper": check_proper(T.symbol, X, Y).to_dict(),
        "decomposition": {"Y3_at": [float(v) for v in y[dec.Y3]], "Y1_count": int(len(dec.Y1)),
                          "Y2_count": int(len(dec.Y2)), "h_max_error": h_err,
                          "residuals": dec.residuals},
    }
    out = {"checks.json": checks}
    for mode in ("dp", "isometric"):
        rep = attempt_extension(T, mode, tol)
        doc = rep.to_dict()
        if mode == "isometric":
            lim = rep.series["limit"]
            far = (np.abs(y) > 2.5) & ~np.isnan(lim)
            doc["inferred_g_halfwidth_beyond_2.5"] = float((rep.series["hi"][far] - lim[far]).max())
        out[f"extension-{mode}.json"] = doc
    out["numerics.json"] = reproduce_example9_numerics(max(R, 50.0), max(n, 2000), tol=tol)
    return out


def counterexamples(cfg):
    tol = C0Tolerance.discrete(cfg.tolerance.eps_tail)
    X, Y = models.line_spaces(20.0, 800)
    corpus = _corpus(X, tol, cfg)
    sym = models.nonproper_symbol(X, Y)
    build_weighted_composition(X, Y, sym, tol, corpus=corpus)
    nonproper = {"build": "accepted", "proper": check_proper(sym, X, Y).to_dict()}
    try:
        build_weighted_composition(X, Y, models.growing_weight_symbol(X, Y), tol, corpus=corpus)
        growing = {"build": "accepted"}
    except WclError as e:
        growing = {"build": "rejected", **e.to_dict()}
    return {"nonproper.json": nonproper, "growing-weight.json": growing}


BUILDERS = {
    "example5": example5,
    "example6": example6,
    "example9": example9,
    "lemma3-counterexamples": counterexamples,
}


def run_gallery(name, out_dir, cfg=None):
    """Write the golden reports for ``name`` (or ``"all"``) under ``out_dir``."""
    cfg = cfg or RunConfig()
    names = NAMES if name == "all" else (name,)
    for nm in names:
        if nm not in BUILDERS:
            raise ValueError(f"unknown gallery entry {nm!r}")
    written = []
    for nm in names:
        for fname, doc in BUILDERS[nm](cfg).items():
            path = Path(out_dir) / nm / fname
            write_json(doc, path)
            written.append(str(path))
    return written
