"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import itertools
import json
import time

import numpy as np
import pytest

from conftest import tiny_space
from wcl import models, synthetic
from wcl.analysis import (
    attempt_extension,
    decompose_dp,
    inverse_operator,
    recover_bijective_dp,
    recover_isometry,
    reproduce_example9_numerics,
)
from wcl.cli import main
from wcl.funcspace import C0Tolerance
from wcl.operator import (
    MatrixOperator,
    WeightedComposition,
    check_disjointness_preserving,
    check_isometry,
    check_proper,
    dp_definitional,
    dp_structural,
    isometry_definitional,
    isometry_structural,
    materialize,
)
from wcl.serialize import write_json

VALUES = synthetic.GRID_VALUES


def unit_vertices(n):
    return np.array(list(itertools.product([-1.0, 1.0], repeat=n)))


def all_grid_matrices(ny, nx):
    """Every ny×nx matrix over the five grid values, as one stacked array."""
    k = ny * nx
    idx = np.arange(5 ** k)
    digits = (idx[:, None] // 5 ** np.arange(k - 1, -1, -1)) % 5
    return VALUES[digits].reshape(-1, ny, nx)


def isometry_bias(rng, n=6):
    """6×6 grid matrix with pure rows for a random subset of columns."""
    A = rng.choice(VALUES, size=(n, n)) * (rng.random((n, n)) < 0.4)
    cols = rng.permutation(n)[: rng.integers(n - 1, n + 1)]
    rows = rng.permutation(n)[: len(cols)]
    A[rows] = 0.0
    A[rows, cols] = rng.choice([-1.0, 1.0], size=len(cols))
    for y in np.setdiff1d(np.arange(n), rows):
        s = np.abs(A[y]).sum()
        if s > 1:
            A[y] /= 2 * s
    return A


# 1 ---------------------------------------------------------------------------

def test_dp_structural_oracle(criterion):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    agree, dp_count = 0, 0
    for _ in range(500):
        ny, nx = rng.integers(1, 9, size=2)
        density = rng.random()
        A = rng.choice(VALUES, size=(ny, nx)) * (rng.random((ny, nx)) < density)
        s, d = bool(dp_structural(A)), bool(dp_definitional(A))
        agree += s == d
        dp_count += s
    dt = time.perf_counter() - t0
    ok = agree == 500 and dt < 5
    criterion(1, ok, f"agreement {agree}/500 ({dp_count} DP instances), {dt:.2f}s")
    assert ok


# 2 ---------------------------------------------------------------------------

def _iso_agreement():
    t0 = time.perf_counter()
    total = agree = unit_disagree = 0
    example = None
    for ny, nx in itertools.product(range(1, 4), repeat=2):
        stack = all_grid_matrices(ny, nx)
        for chunk in np.array_split(stack, max(1, len(stack) // 200_000)):
            s = isometry_structural(chunk)
            d = isometry_definitional(chunk)
            u = isometry_definitional(chunk, V=unit_vertices(nx))
            total += len(chunk)
            agree += int(np.sum(s == d))
            bad = np.flatnonzero(s != u)
            unit_disagree += len(bad)
            if example is None and len(bad):
                example = chunk[bad[0]].tolist()
    rng = np.random.default_rng(2)
    rand_iso = 0
    for k in range(200):
        A = rng.choice(VALUES, size=(6, 6)) if k % 2 else isometry_bias(rng)
        s = bool(isometry_structural(A))
        agree += s == bool(isometry_definitional(A))
        unit_disagree += s != bool(isometry_definitional(A, V=unit_vertices(6)))
        rand_iso += s
        total += 1
    return total, agree, unit_disagree, example, rand_iso, time.perf_counter() - t0


@pytest.fixture(scope="module")
def iso_agreement():
    return _iso_agreement()


def test_isometry_structural_oracle(criterion, iso_agreement):
    total, agree, unit_disagree, example, rand_iso, dt = iso_agreement
    ok = agree == total and dt < 60
    criterion(2, ok, f"face-vertex agreement {agree}/{total} ({rand_iso} isometries among "
                     f"the 6×6 set), {dt:.1f}s; ±1-vertex-only oracle disagrees on "
                     f"{unit_disagree} (e.g. {example})")
    assert ok


@pytest.mark.xfail(strict=True, reason="±1 vertices never probe ‖Te_x‖; [[½,½],[½,−½]] maps "
                                       "every ±1 vertex to norm 1 yet halves e_1")
def test_isometry_oracle_with_unit_vertices_only(iso_agreement):
    assert iso_agreement[2] == 0


# 3 ---------------------------------------------------------------------------

def test_symbol_recovery_exact(criterion):
    rng = np.random.default_rng(3)
    tol = C0Tolerance.discrete()
    exact, worst = 0, 0.0
    for _ in range(200):
        p = synthetic.weighted_permutation_plus_contraction(rng)
        rec = recover_isometry(p.T, tol)
        same = (np.array_equal(rec.Y1, p.Y1) and np.array_equal(rec.symbol.phi, p.phi)
                and np.array_equal(rec.symbol.h, p.h) and np.all(np.abs(rec.symbol.h) == 1))
        exact += same
        worst = max(worst, rec.residual)
    ok = exact == 200 and worst <= 1e-12
    criterion(3, ok, f"exact recoveries {exact}/200, max residual {worst:.1e} (floating mode)")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_example5_reproduction(criterion):
    t0 = time.perf_counter()
    T = models.example5_operator(20.0, 400)
    rec = recover_isometry(T, C0Tolerance.discrete())
    dt = time.perf_counter() - t0
    X, Y = T.domain, T.codomain
    y1_ok = np.array_equal(rec.Y1, models.example5_expected_y1(Y))
    phi_off = float(np.abs(X.coords[rec.symbol.phi] - Y.coords[rec.Y1]).max())
    h_dev = float(np.abs(rec.symbol.h - 1).max())
    ok = y1_ok and phi_off <= X.mesh and h_dev <= 1e-9 and rec.residual <= 1e-9 and dt < 10
    criterion(4, ok, f"Y1 = [0,+∞) samples: {y1_ok} ({len(rec.Y1)}), φ offset {phi_off:.1e}, "
                     f"|h-1| {h_dev:.1e}, residual {rec.residual:.1e}, {dt:.2f}s")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_nonproper_and_growing_weight_counterexamples(criterion, tmp_path, capsys):
    t0 = time.perf_counter()
    X, Y = models.line_spaces(20.0, 800)
    sym = models.nonproper_symbol(X, Y)
    rep = check_proper(sym, X, Y)
    w = rep.witness or {}
    K = X.exhaustion[w.get("window_level", 1) - 1]
    esc = np.concatenate([np.asarray(e["indices"]) for e in w.get("escaping", [])] or [[]]).astype(int)
    deep = set(np.concatenate(list(Y.tails.values())).tolist())
    witness_ok = (rep.verdict == "not_proper" and len(esc) > 0
                  and set(esc.tolist()) <= deep and np.isin(sym.phi[esc], K).all()
                  and Y.coords[esc].min() <= -Y.coords.max() * (Y.levels - 1) / Y.levels)

    files = []
    for name, doc in (("x", X.to_dict()), ("y", Y.to_dict()),
                      ("s", models.growing_weight_symbol(X, Y).to_dict())):
        write_json(doc, tmp_path / f"{name}.json")
        files.append(str(tmp_path / f"{name}.json"))
    code = main(["build", *files, "--out", str(tmp_path / "out.json")])
    out = json.loads((tmp_path / "out.json").read_text())
    reject_ok = (code == 2 and out.get("reason") == "OutputNotC0"
                 and "values" in out.get("detail", {}).get("witness_function", {}))
    dt = time.perf_counter() - t0
    ok = witness_ok and reject_ok and dt < 10
    criterion(5, ok, f"not_proper with escape witness: {witness_ok} ({len(esc)} escaping samples); "
                     f"build exit {code} reason {out.get('reason')}, {dt:.2f}s")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_example9_certificates(criterion):
    t0 = time.perf_counter()
    tol = C0Tolerance.continuum()
    T = models.example9_operator(50.0, 2000)
    dp = attempt_extension(T, "dp", tol)
    iso = attempt_extension(T, "isometric", tol)
    num = reproduce_example9_numerics(50.0, 2000, tol=tol)
    dt = time.perf_counter() - t0
    lim = dp.certificate["h_tail_limits"]
    y = T.codomain.coords
    far = (np.abs(y) > 2.5) & ~np.isnan(iso.series["limit"])
    g = float(np.max(iso.series["hi"][far] - iso.series["limit"][far]))
    ok = (dp.obstructed and abs(lim["+∞"] - 1) <= 1e-6 and abs(lim["−∞"] + 1) <= 1e-6
          and abs(dp.certificate["limit_gap"] - 2) <= 2e-6
          and iso.obstructed and g <= 1e-6 and abs(iso.certificate["limit_gap"] - 2) <= 2e-6
          and num["contradiction_margin"] >= 0.999 and dt < 30)
    criterion(6, ok, f"dp limits {lim}, gap {dp.certificate['limit_gap']}; isometric max |g| "
                     f"{g:.1e} on {int(far.sum())} samples, gap {iso.certificate['limit_gap']}; "
                     f"margin {num['contradiction_margin']}, {dt:.2f}s")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_blowup_classification(criterion):
    rng = np.random.default_rng(7)
    tol = C0Tolerance.discrete()
    exact = false_pos = 0
    for _ in range(50):
        fam = synthetic.blowup_family(rng, K=5)
        dec = decompose_dp(fam.levels, tol)
        exact += np.array_equal(dec.Y2, fam.Y2) and np.array_equal(dec.F, fam.F)
    for _ in range(50):
        fam = synthetic.blowup_family(rng, K=5, planted=False)
        false_pos += len(decompose_dp(fam.levels, tol).Y2) > 0
    ok = exact == 50 and false_pos == 0
    criterion(7, ok, f"planted families recovered exactly {exact}/50, "
                     f"controls with false positives {false_pos}/50")
    assert ok


# 8 ---------------------------------------------------------------------------

def test_bijective_round_trip(criterion):
    rng = np.random.default_rng(8)
    tol = C0Tolerance.discrete()
    good, worst = 0, 0.0
    for _ in range(200):
        p = synthetic.bijective_dp(rng)
        sym, inv = recover_bijective_dp(p.T, tol)
        A = p.T.to_matrix()
        fwd = materialize(WeightedComposition(p.T.domain, p.T.codomain, sym)).to_matrix()
        back = inverse_operator(p.T, inv).to_matrix()
        err = float(np.abs(back - np.linalg.inv(A)).max())
        worst = max(worst, err)
        good += (np.array_equal(fwd, A) and err <= 1e-12
                 and np.array_equal(inv.phi, np.argsort(sym.phi)))
    ok = good == 200
    criterion(8, ok, f"round trips {good}/200, max |T⁻¹ − inverse WC| {worst:.1e}")
    assert ok


# 9 ---------------------------------------------------------------------------

def test_extension_soundness(criterion):
    rng = np.random.default_rng(9)
    tol = C0Tolerance.continuum()
    counts = {}
    for mode in ("isometric", "dp"):
        checker = check_isometry if mode == "isometric" else check_disjointness_preserving
        sound = flipped = 0
        for _ in range(50):
            ps = synthetic.tail_constant_symbol(rng, mode=mode)
            rep = attempt_extension(ps.T, mode, tol)
            sound += rep.extendable and checker(rep.operator, tol).passed
            flipped += attempt_extension(ps.flipped, mode, tol).obstructed
        counts[mode] = (sound, flipped)
    ok = all(v == (50, 50) for v in counts.values())
    criterion(9, ok, "; ".join(f"{m}: extendable+checked {s}/50, flipped obstructed {f}/50"
                               for m, (s, f) in counts.items()))
    assert ok
