from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perclab.errors import UsageError
from perclab.lattice import (
    Box,
    LatticeSpec,
    boundary_membership,
    boundary_size,
    canonical_edge,
    edge_between,
    enumerate_box,
    neighbors,
    norms,
)

NN2 = LatticeSpec.nearest_neighbor(2)


def test_neighbors_d1_nn():
    spec = LatticeSpec.nearest_neighbor(1)
    assert neighbors(spec, (0,)) == [(-1,), (1,)]


def test_neighbors_d2_nn_count_and_order():
    got = neighbors(NN2, (0, 0))
    assert len(got) == 4
    assert got == sorted(got)


def test_neighbors_spread_out_l2_count():
    # l1 ball of radius 2 in d=2 has 13 points; minus the center: 12.
    spec = LatticeSpec.spread_out(2, 2)
    ball = [
        q
        for q in itertools.product(range(-2, 3), repeat=2)
        if abs(q[0]) + abs(q[1]) <= 2
    ]
    assert len(ball) == 13
    assert len(neighbors(spec, (0, 0))) == 12


def test_nn_equals_spread_out_one():
    for d in (1, 2, 3):
        nn = LatticeSpec.nearest_neighbor(d)
        so = LatticeSpec.spread_out(d, 1)
        for pt in [(0,) * d, tuple(range(d)), (-3,) * d]:
            assert neighbors(nn, pt) == neighbors(so, pt)


def test_dimension_mismatch_is_usage_error():
    with pytest.raises(UsageError):
        neighbors(NN2, (1, 2, 3))
    with pytest.raises(UsageError):
        norms((0, 0), (1,))


def test_boundary_membership_examples():
    assert boundary_membership(NN2, 1, (1, 0))
    assert not boundary_membership(NN2, 1, (0, 0))
    # exactly 8 of the 9 points of Q_1 are boundary
    count = sum(
        boundary_membership(NN2, 1, q)
        for q in itertools.product((-1, 0, 1), repeat=2)
    )
    assert count == 8
    # spread-out boundary is a thick shell
    so = LatticeSpec.spread_out(1, 2)
    assert boundary_membership(so, 3, (2,))
    assert not boundary_membership(so, 3, (1,))


def test_boundary_membership_outside_box_is_false():
    assert not boundary_membership(NN2, 1, (2, 0))


def test_norms_examples():
    assert norms((0, 0), (0, 0)) == (0.0, 0, 0)
    assert norms((0, 0), (3, 4)) == (5.0, 4, 7)
    e, linf, l1 = norms((0, 0, 0), (1, 1, 1))
    assert math.isclose(e, math.sqrt(3))
    assert (linf, l1) == (1, 3)


def test_enumerate_box_counts():
    assert len(list(enumerate_box(NN2, 1, "all"))) == 9
    assert len(list(enumerate_box(NN2, 2, ("annulus", 1)))) == 25 - 9
    spec3 = LatticeSpec.nearest_neighbor(3)
    assert len(list(enumerate_box(spec3, 1, "boundary"))) == 26


def test_enumerate_box_order_is_lexicographic():
    pts = list(enumerate_box(NN2, 1, "all"))
    assert pts == sorted(pts)


def test_enumerate_box_warns_above_limit():
    with pytest.warns(RuntimeWarning):
        list(enumerate_box(NN2, 2, "all", warn_limit=10))


def test_boundary_size_formula_nn():
    for d in (1, 2, 3):
        spec = LatticeSpec.nearest_neighbor(d)
        for r in range(1, 5):
            expected = (2 * r + 1) ** d - (2 * r - 1) ** d
            assert boundary_size(spec, r) == expected
            enumerated = sum(
                boundary_membership(spec, r, q)
                for q in itertools.product(range(-r, r + 1), repeat=d)
            )
            assert enumerated == expected


def test_boundary_shell_matches_neighbor_rule_spread_out():
    # the kernels use the linf shell form; pin it to the neighbor rule
    for d in (1, 2):
        for L in (1, 2, 3):
            spec = LatticeSpec.spread_out(d, L)
            for r in range(0, 5):
                for q in itertools.product(range(-r, r + 1), repeat=d):
                    by_rule = boundary_membership(spec, r, q)
                    by_shell = max(abs(c) for c in q) > r - L
                    assert by_rule == by_shell, (d, L, r, q)


def test_edge_canonicalization():
    e1 = canonical_edge((1, 0), (0, 0))
    e2 = canonical_edge((0, 0), (1, 0))
    assert e1 == e2
    assert e1.a < e1.b
    with pytest.raises(UsageError):
        canonical_edge((0, 0), (0, 0))


def test_edge_between_checks_adjacency():
    assert edge_between(NN2, (0, 0), (0, 1)).a == (0, 0)
    with pytest.raises(UsageError):
        edge_between(NN2, (0, 0), (1, 1))


def test_box_membership_and_count():
    b = Box(2)
    assert b.contains((2, -2))
    assert not b.contains((3, 0))
    assert b.point_count(2) == 25
    assert Box(0).point_count(3) == 1
    shifted = Box(1, (5, 5))
    assert shifted.contains((6, 4))
    assert not shifted.contains((3, 5))


def test_spec_json_round_trip():
    for spec in (NN2, LatticeSpec.spread_out(7, 3)):
        assert LatticeSpec.from_json(spec.to_json()) == spec
    assert NN2.to_json() == {"d": 2, "model": "nn"}
    assert LatticeSpec.spread_out(3, 2).to_json() == {"d": 3, "model": {"spread_out": 2}}


def test_spec_validation():
    with pytest.raises(UsageError):
        LatticeSpec.nearest_neighbor(0)
    with pytest.raises(UsageError):
        LatticeSpec.spread_out(2, 0)
    with pytest.raises(UsageError):
        LatticeSpec.from_json({"d": 2, "model": "triangular"})


coords = st.integers(min_value=-50, max_value=50)


@settings(max_examples=60, deadline=None)
@given(
    d=st.integers(1, 3),
    reach=st.integers(1, 3),
    data=st.data(),
)
def test_neighbor_symmetry_and_translation(d, reach, data):
    spec = LatticeSpec.spread_out(d, reach)
    x = tuple(data.draw(coords) for _ in range(d))
    t = tuple(data.draw(coords) for _ in range(d))
    nbrs = neighbors(spec, x)
    for y in nbrs:
        assert x in neighbors(spec, y)
    shifted = neighbors(spec, tuple(a + b for a, b in zip(x, t)))
    assert shifted == [tuple(a + b for a, b in zip(y, t)) for y in nbrs]


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 3), reach=st.integers(1, 2), data=st.data())
def test_adjacency_invariant_under_symmetries(d, reach, data):
    spec = LatticeSpec.spread_out(d, reach)
    x = tuple(data.draw(coords) for _ in range(d))
    y = data.draw(st.sampled_from(neighbors(spec, x)))
    perm = data.draw(st.permutations(range(d)))
    signs = tuple(data.draw(st.sampled_from((-1, 1))) for _ in range(d))

    def apply(pt):
        return tuple(signs[i] * pt[perm[i]] for i in range(d))

    assert apply(y) in neighbors(spec, apply(x))
