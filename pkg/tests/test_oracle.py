from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from perclab.errors import ResourceError, UsageError
from perclab.lattice import LatticeSpec
from perclab.oracle import (
    EventPredicate,
    FiniteGraph,
    exact_disjoint_occurrence,
    exact_expectation,
    exact_probability,
    is_increasing,
    lattice_region_graph,
    raw_disjoint_mask,
    verify_bk,
    verify_fkg,
)

NN1 = LatticeSpec.nearest_neighbor(1)
NN2 = LatticeSpec.nearest_neighbor(2)


def path_graph(n):
    return FiniteGraph(vertices=list(range(n)), edges=[(i, i + 1) for i in range(n - 1)])


def test_single_edge_probability():
    g = path_graph(2)
    for p in (0.0, 0.25, 0.7, 1.0):
        assert exact_probability(g, p, EventPredicate.connect(0, 1)) == pytest.approx(p, abs=1e-15)


def test_series_and_parallel():
    series = path_graph(3)
    assert exact_probability(series, 0.5, EventPredicate.connect(0, 2)) == pytest.approx(0.25)
    parallel = FiniteGraph(
        vertices=["s", "a", "b", "t"], edges=[(0, 1), (1, 3), (0, 2), (2, 3)]
    )
    p = 0.3
    expected = 1 - (1 - p**2) ** 2
    assert exact_probability(parallel, p, EventPredicate.connect(0, 3)) == pytest.approx(expected, abs=1e-14)


def test_d1_one_arm_closed_form():
    g = lattice_region_graph(NN1, 3, cap=6)
    o = g.index_of((0,))
    ends = [g.index_of((-3,)), g.index_of((3,))]
    p = 0.6
    got = exact_probability(g, p, EventPredicate.connect_to_set(o, ends))
    assert got == pytest.approx(2 * p**3 - p**6, abs=1e-14)
    assert got == pytest.approx(0.385344, abs=1e-12)


def test_complementary_probabilities_sum_to_one():
    g = lattice_region_graph(NN2, 1, cap=12)
    ev = EventPredicate.connect(g.index_of((0, 0)), g.index_of((1, 1)))
    for p in (0.2, 0.5, 0.9):
        mask = ev.mask(g)
        a = exact_probability(g, p, ev)
        b = exact_probability(g, p, EventPredicate.custom(~mask))
        assert abs(a + b - 1.0) < 1e-12


def test_enumeration_cap_enforced():
    with pytest.raises(ResourceError):
        FiniteGraph(vertices=list(range(30)), edges=[(i, i + 1) for i in range(29)])


def test_connection_events_are_increasing():
    g = lattice_region_graph(NN2, 1, cap=12)
    o = g.index_of((0, 0))
    evs = [
        EventPredicate.connect(o, g.index_of((1, 1))),
        EventPredicate.connect_to_set(o, [g.index_of((1, 0)), g.index_of((0, 1))]),
        EventPredicate.size_at_least(o, 3),
    ]
    for ev in evs:
        assert is_increasing(g, ev.mask(g))
    # a decreasing event is flagged
    assert not is_increasing(g, ~evs[0].mask(g))


def test_size_at_least_counts():
    g = path_graph(3)
    # |C(0)| >= 2 iff edge (0,1) open; >= 3 iff both open
    assert exact_probability(g, 0.5, EventPredicate.size_at_least(0, 2)) == pytest.approx(0.5)
    assert exact_probability(g, 0.5, EventPredicate.size_at_least(0, 3)) == pytest.approx(0.25)


def test_disjoint_independent_supports_product():
    g = FiniteGraph(vertices=list(range(4)), edges=[(0, 1), (2, 3)])
    p = 0.4
    got = exact_disjoint_occurrence(
        g, p, [EventPredicate.connect(0, 1), EventPredicate.connect(2, 3)]
    )
    assert got == pytest.approx(p * p, abs=1e-14)


def test_disjoint_shared_bridge_zero():
    g = path_graph(4)
    got = exact_disjoint_occurrence(
        g, 0.7, [EventPredicate.connect(0, 3), EventPredicate.connect(0, 3)]
    )
    assert got == 0.0


def test_disjoint_occurrence_implies_intersection():
    g = lattice_region_graph(NN2, 1, cap=12)
    o = g.index_of((0, 0))
    targets = [i for i, q in enumerate(g.vertices) if max(abs(c) for c in q) == 1]
    arms = ((o, tuple(targets)), (o, tuple(targets)))
    disjoint_mask = EventPredicate.multi_arm_disjoint(arms).mask(g)
    inter = EventPredicate.connect_to_set(o, targets).mask(g)
    assert not np.any(disjoint_mask & ~inter)


def _random_graph(rng, max_edges=10, n_vertices=6):
    all_edges = list(itertools.combinations(range(n_vertices), 2))
    rng.shuffle(all_edges)
    m = int(rng.integers(3, max_edges + 1))
    return FiniteGraph(vertices=list(range(n_vertices)), edges=sorted(all_edges[:m]))


def _random_connection_event(rng, g):
    n = len(g.vertices)
    a = int(rng.integers(n))
    if rng.random() < 0.5:
        b = int((a + 1 + rng.integers(n - 1)) % n)
        return EventPredicate.connect(a, b)
    k = int(rng.integers(1, 3))
    targets = sorted(set(int(t) for t in rng.integers(0, n, size=k)) - {a})
    if not targets:
        targets = [(a + 1) % n]
    return EventPredicate.connect_to_set(a, targets)


def test_bk_inequality_sweep():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = _random_graph(rng)
        for p in (0.2, 0.5, 0.8):
            a = _random_connection_event(rng, g)
            b = _random_connection_event(rng, g)
            lhs, rhs, holds = verify_bk(g, p, a, b)
            assert holds, (g.edges, a.kind, b.kind, lhs, rhs)


def test_fkg_inequality_sweep():
    rng = np.random.default_rng(6)
    for _ in range(20):
        g = _random_graph(rng)
        for p in (0.2, 0.5, 0.8):
            a = _random_connection_event(rng, g)
            b = _random_connection_event(rng, g)
            lhs, rhs, holds = verify_fkg(g, p, a, b)
            assert holds, (g.edges, a.kind, b.kind, lhs, rhs)


def test_fkg_same_event():
    g = path_graph(4)
    a = EventPredicate.connect(0, 3)
    lhs, rhs, holds = verify_fkg(g, 0.6, a, a)
    assert holds and lhs >= rhs


def test_fkg_rejects_non_increasing():
    g = path_graph(2)
    dec = EventPredicate.custom(~EventPredicate.connect(0, 1).mask(g))
    with pytest.raises(UsageError):
        verify_fkg(g, 0.5, dec, dec)


def test_bk_independent_supports_equality():
    g = FiniteGraph(vertices=list(range(4)), edges=[(0, 1), (2, 3)])
    lhs, rhs, holds = verify_bk(
        g, 0.35, EventPredicate.connect(0, 1), EventPredicate.connect(2, 3)
    )
    assert holds and lhs == pytest.approx(rhs, abs=1e-14)


def test_raw_split_equals_path_packing():
    # the witness-split definition and the path-packing search agree
    # configuration by configuration on graphs with <= 10 edges
    rng = np.random.default_rng(9)
    for trial in range(30):
        g = _random_graph(rng, max_edges=10)
        events = [_random_connection_event(rng, g) for _ in range(2)]
        arms = tuple(ev.arm() for ev in events)
        packed = EventPredicate.multi_arm_disjoint(arms).mask(g)
        raw = raw_disjoint_mask(g, events)
        assert np.array_equal(packed, raw), (trial, g.edges)


def test_raw_split_three_events():
    g = FiniteGraph(
        vertices=list(range(6)),
        edges=[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4), (0, 4)],
    )
    events = [EventPredicate.connect(0, 4)] * 3
    arms = tuple(ev.arm() for ev in events)
    packed = EventPredicate.multi_arm_disjoint(arms).mask(g)
    raw = raw_disjoint_mask(g, events)
    assert np.array_equal(packed, raw)
    # at full openness there are exactly 4 edge-disjoint 0->4 routes
    assert packed[-1]


def test_exact_expectation_trivial():
    g = lattice_region_graph(NN2, 1, cap=12)
    o = g.index_of((0, 0))
    boundary = [i for i, q in enumerate(g.vertices) if max(abs(c) for c in q) == 1]
    allv = list(range(len(g.vertices)))
    assert exact_expectation(g, 0.0, ("connected_count", o, boundary)) == 0.0
    assert exact_expectation(g, 0.0, ("mass", o, allv)) == 1.0
    assert exact_expectation(g, 1.0, ("connected_count", o, boundary)) == 8.0
    assert exact_expectation(g, 1.0, ("mass", o, allv)) == 9.0
    assert exact_expectation(g, 1.0, ("mass_sq", o, allv)) == 81.0


def test_exact_expectation_restricted_subgraph():
    # restricted connectivity: X_1 computed inside Q_1 of a larger Q_2 graph
    g = lattice_region_graph(NN1, 2, cap=4)
    o = g.index_of((0,))
    boundary = [g.index_of((-1,)), g.index_of((1,))]
    inner_bits = [
        b
        for b, (i, j) in enumerate(g.edges)
        if abs(g.vertices[i][0]) <= 1 and abs(g.vertices[j][0]) <= 1
    ]
    p = 0.6
    got = exact_expectation(
        g, p, ("connected_count_sub", o, boundary, inner_bits)
    )
    assert got == pytest.approx(2 * p, abs=1e-14)


def test_conditional_expectation_scaling():
    g = path_graph(3)
    # condition on the first edge being open: P(0<->2 | e0 open) = p
    from perclab.oracle import exact_conditional_probability

    got = exact_conditional_probability(
        g, 0.4, EventPredicate.connect(0, 2), {0: True}
    )
    assert got == pytest.approx(0.4, abs=1e-14)
    got = exact_conditional_probability(
        g, 0.4, EventPredicate.connect(0, 2), {0: False}
    )
    assert got == 0.0


def test_t_loc_implies_t_s_on_small_instances():
    # the local-to-global implication at s=3 where the log thresholds are
    # coherent, exhaustively over every configuration of a d=1 region
    s = 3
    spec = NN1
    env = 4
    g = lattice_region_graph(spec, env, cap=8)
    o = g.index_of((0,))
    inner = [i for i, q in enumerate(g.vertices) if abs(q[0]) <= s]
    shell = [i for i, q in enumerate(g.vertices) if abs(q[0]) > env - 1]
    inner_bits = [
        b
        for b, (i, j) in enumerate(g.edges)
        if abs(g.vertices[i][0]) <= env and abs(g.vertices[j][0]) <= env
    ]
    labels_full = g.labels()
    thr_a = s**4 * math.log(s) ** 4
    thr_b = math.log(s) ** 3
    thr_s = s**4 * math.log(s) ** 7
    for config in range(g.n_configs):
        # T_s: |C(0) cap Q_s| on the whole graph
        lab = labels_full[config]
        mass = sum(1 for i in inner if lab[i] == lab[o])
        t_s = mass < thr_s
        # T_loc parts on the same configuration
        comp_sizes: dict = {}
        for i in inner:
            comp_sizes[lab[i]] = comp_sizes.get(lab[i], 0) + 1
        part_a = max(comp_sizes.values()) < thr_a
        from perclab.oracle import max_disjoint_crossings_exhaustive

        crossings = max_disjoint_crossings_exhaustive(g, config, inner, shell)
        part_b = crossings <= thr_b
        if part_a and part_b:
            assert t_s, config
    del inner_bits


def test_graph_json_round_trip():
    g = lattice_region_graph(NN2, 1, cap=12)
    g2 = FiniteGraph.from_json(g.to_json())
    assert g2.vertices == g.vertices
    assert g2.edges == g.edges


def test_disjoint_requires_connection_events():
    g = path_graph(2)
    with pytest.raises(UsageError):
        exact_disjoint_occurrence(g, 0.5, [EventPredicate.size_at_least(0, 2)])
