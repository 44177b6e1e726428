import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wcl.errors import InvalidSpec
from wcl.space import (
    Space,
    adjacent_pairs,
    compactify,
    make_extended_line_space,
    make_interval_space,
    make_line_with_strip_space,
    nearest_index,
    neighbors,
    tail_points,
)


def test_halfline_model(halfline):
    s = halfline
    assert not s.is_compact_model
    assert s.size == 401
    assert s.mesh == pytest.approx(0.05)
    assert s.coords[0] == 0.0 and s.coords[-1] == 20.0
    assert list(s.tails) == ["+∞"]
    assert s.levels == 8


def test_compact_nine_point_grid():
    s = make_interval_space(-1, 1, 8)
    assert s.is_compact_model
    assert s.size == 9
    assert np.array_equal(s.exhaustion[-1], np.arange(9))
    assert s.tails == {}


def test_line_model_has_both_tails():
    s = make_interval_space(-math.inf, math.inf, 2000, ("+∞", "−∞"), truncate=50)
    assert set(s.tails) == {"+∞", "−∞"}
    assert s.coords.min() == -50 and s.coords.max() == 50
    # tails run outward
    assert np.all(np.diff(s.coords[s.tails["+∞"]]) > 0)
    assert np.all(np.diff(s.coords[s.tails["−∞"]]) < 0)


def test_tails_contradicting_compactness_rejected():
    with pytest.raises(InvalidSpec):
        make_interval_space(0, 1, 10, ("+∞",), compact=True)
    with pytest.raises(InvalidSpec):
        make_interval_space(0, math.inf, 10)


def test_too_few_steps_rejected():
    with pytest.raises(InvalidSpec):
        make_interval_space(0, 1, 4)


def test_tail_points_compact_is_empty():
    s = make_interval_space(-1, 1, 8)
    assert len(tail_points(s, 1)) == 0


def test_tail_points_halfline_level_L_minus_1(halfline):
    L, R = halfline.levels, 20.0
    got = tail_points(halfline, L - 1)
    expected = np.flatnonzero(halfline.coords > R * (L - 1) / L + 1e-12)
    assert np.array_equal(got, expected)


def test_tail_points_line_level_1_is_both_tails():
    s = make_interval_space(-math.inf, math.inf, 2000, ("+∞", "−∞"), truncate=50)
    got = tail_points(s, 1)
    outside = np.flatnonzero(np.abs(s.coords) > 50 / 8 + 1e-12)
    assert np.array_equal(got, outside)
    assert np.array_equal(np.sort(np.concatenate(list(s.tails.values()))), got)


def test_neighbors_interior_and_endpoint():
    s = make_interval_space(0, 1, 10)
    assert neighbors(s, 5, s.mesh).tolist() == [4, 5, 6]
    assert neighbors(s, 0, 2 * s.mesh).tolist() == [0, 1, 2]


def test_neighbors_strip_boundary_matches_distance_scan():
    s = make_line_with_strip_space(2.0, 40)
    # a sample on the strip's left edge u1 = 0, u2 = 0.5
    i = int(np.argmin(np.linalg.norm(s.points - [0.0, 0.5], axis=1)))
    r = 2.5 * s.mesh
    brute = [j for j in range(s.size) if np.linalg.norm(s.points[j] - s.points[i]) <= r + 1e-12]
    assert neighbors(s, i, r).tolist() == brute


def test_neighbors_radius_below_mesh_rejected():
    s = make_interval_space(0, 1, 10)
    with pytest.raises(ValueError):
        neighbors(s, 0, s.mesh / 2)


def test_exhaustion_monotone_and_tail_partition(line):
    for a, b in zip(line.exhaustion, line.exhaustion[1:]):
        assert set(a) < set(b)
    outside = np.setdiff1d(np.arange(line.size), line.exhaustion[0])
    labelled = np.concatenate(list(line.tails.values()))
    assert np.array_equal(np.sort(labelled), outside)


def test_extended_line_markers():
    s = make_extended_line_space(5.0, 20)
    assert s.is_compact_model
    assert s.markers == {"-inf": 0, "+inf": s.size - 1}


def test_strip_space_tails_are_chains():
    s = make_line_with_strip_space(3.0, 60)
    for idx in s.tails.values():
        steps = np.linalg.norm(np.diff(s.points[idx], axis=0), axis=1)
        assert steps.max() <= 3 * s.mesh + 1e-12


def test_compactify_appends_infinity(halfline):
    c = compactify(halfline)
    assert c.size == halfline.size + 1
    assert c.infinity_index == halfline.size
    assert c.is_compact_model
    assert compactify(c) is c


def test_serialization_roundtrip(line):
    doc = line.to_dict()
    back = Space.from_dict(doc)
    assert back.same_as(line)
    assert back.name == line.name
    c = compactify(line)
    assert Space.from_dict(c.to_dict()).same_as(c)


def test_invalid_duplicate_points():
    with pytest.raises(InvalidSpec):
        Space(np.array([0.0, 0.0, 1.0]), 1.0, (np.arange(3),), True)


def test_nearest_index_snaps(halfline):
    assert nearest_index(halfline, [0.51, 19.99]).tolist() == [10, 400]


@given(st.integers(8, 60), st.floats(1.0, 4.0), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_neighbors_symmetric(n, r_mult, seed):
    s = make_interval_space(-1.0, 2.0, n)
    rng = np.random.default_rng(seed)
    i, j = rng.integers(0, s.size, 2)
    r = r_mult * s.mesh
    assert (j in neighbors(s, i, r)) == (i in neighbors(s, j, r))


@given(st.integers(8, 200), st.integers(2, 10), st.sampled_from([("+∞",), ("−∞",), ("+∞", "−∞")]))
@settings(max_examples=40, deadline=None)
def test_constructed_spaces_satisfy_invariants(n, levels, tails):
    a = -math.inf if "−∞" in tails else 0.0
    b = math.inf if "+∞" in tails else 0.0
    if a == b:
        b = 1.0
    s = make_interval_space(a, b, n, tails, truncate=10.0, levels=levels)
    for k1, k2 in zip(s.exhaustion, s.exhaustion[1:]):
        assert np.all(np.isin(k1, k2))
    outside = np.setdiff1d(np.arange(s.size), s.exhaustion[0])
    assert np.array_equal(np.sort(np.concatenate(list(s.tails.values()))), outside)
    pairs = adjacent_pairs(s, s.mesh)
    assert len(pairs) == s.size - 1
