from __future__ import annotations

import itertools

import numpy as np
import pytest

from perclab.disjoint_paths import (
    OpenSubgraph,
    count_disjoint_crossings,
    max_edge_disjoint,
    multi_arm_event,
)
from perclab.errors import UsageError
from perclab.explorer import GrowthBudget, grow_cluster, one_arm_event
from perclab.lattice import Box, LatticeSpec, canonical_edge
from perclab.oracle import (
    FiniteGraph,
    disjoint_paths_exist,
    max_disjoint_crossings_exhaustive,
)
from perclab.random_field import FieldConfig

NN2 = LatticeSpec.nearest_neighbor(2)
BUDGET = GrowthBudget(max_vertices=10_000)


def _subgraph(edges):
    vertices = set()
    for a, b in edges:
        vertices.add(a)
        vertices.add(b)
    return OpenSubgraph(vertices, {canonical_edge(a, b) for a, b in edges})


def _path_edges(*pts):
    return list(zip(pts, pts[1:]))


def test_single_path_count_one():
    sub = _subgraph(_path_edges((0, 0), (0, 1), (0, 2), (1, 2)))
    w = max_edge_disjoint(sub, [(0, 0)], {(1, 2)})
    assert w.count == 1
    w.validate(sub, {(1, 2)})
    assert w.paths[0][0] == (0, 0) and w.paths[0][-1] == (1, 2)


def test_two_sources_in_open_box():
    # fully open Q_2: two sources on opposite sides route disjointly
    cfg = FieldConfig(1, 1.0)
    clusters = [
        grow_cluster(NN2, cfg, y, Box(2), BUDGET, boundary_radius=2)
        for y in [(-1, 0), (1, 0)]
    ]
    sub = OpenSubgraph.from_clusters(clusters)
    sinks = set().union(*(c.boundary_hits for c in clusters))
    w = max_edge_disjoint(sub, [(-1, 0), (1, 0)], sinks)
    assert w.count == 2
    w.validate(sub, sinks)


def test_diamond_graph():
    # two internally disjoint 2-edge routes s -> t
    s, a, b, t = (0, 0), (1, 1), (1, -1), (2, 0)
    edges = [(s, a), (a, t), (s, b), (b, t)]
    sub = _subgraph(edges)
    assert max_edge_disjoint(sub, [s], {t}).count == 1
    w = max_edge_disjoint(sub, [a, b], {t})
    assert w.count == 2
    w.validate(sub, {t})


def test_source_outside_subgraph_contributes_zero():
    sub = _subgraph(_path_edges((0, 0), (0, 1)))
    w = max_edge_disjoint(sub, [(5, 5), (0, 0)], {(0, 1)})
    assert w.count == 1


def test_empty_sinks_count_zero():
    sub = _subgraph(_path_edges((0, 0), (0, 1)))
    assert max_edge_disjoint(sub, [(0, 0)], set()).count == 0


def test_duplicate_sources_rejected():
    sub = _subgraph(_path_edges((0, 0), (0, 1)))
    with pytest.raises(UsageError):
        max_edge_disjoint(sub, [(0, 0), (0, 0)], {(0, 1)})


def _random_lattice_subgraph(rng, span=2, p=0.55):
    pts = [(x, y) for x in range(-span, span + 1) for y in range(-span, span + 1)]
    edges = []
    for x, y in pts:
        for dx, dy in ((1, 0), (0, 1)):
            q = (x + dx, y + dy)
            if abs(q[0]) <= span and abs(q[1]) <= span and rng.random() < p:
                edges.append(((x, y), q))
    vertices = set(pts)
    return OpenSubgraph(vertices, {canonical_edge(a, b) for a, b in edges})


def _min_cut_by_enumeration(sub, sources, sinks, upto=4):
    """Smallest edge set (size <= upto) whose removal separates all sources
    from all sinks; None when no such small cut exists."""
    edges = sorted(sub.open_edges, key=lambda e: (e.a, e.b))
    src = set(sources) & sub.vertices
    snk = set(sinks) & sub.vertices

    def connected_without(removed):
        adj = {}
        for e in edges:
            if e in removed:
                continue
            adj.setdefault(e.a, []).append(e.b)
            adj.setdefault(e.b, []).append(e.a)
        seen = set(src)
        stack = list(src)
        while stack:
            u = stack.pop()
            if u in snk:
                return True
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return bool(src & snk)

    for k in range(0, upto + 1):
        for combo in itertools.combinations(edges, k):
            if not connected_without(set(combo)):
                return k
    return None


def test_flow_value_equals_min_cut_small_instances():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(25):
        sub = _random_lattice_subgraph(rng)
        sinks = {v for v in sub.vertices if max(abs(c) for c in v) == 2}
        # a single-origin source keeps the flow value <= 4 (the NN degree)
        count = count_disjoint_crossings(sub, Box(0), sinks)
        assert count <= 4
        cut = _min_cut_by_enumeration(sub, {(0, 0)}, sinks)
        assert cut == count, (count, cut)
        checked += 1
    assert checked >= 25


def test_monotone_in_open_edges():
    rng = np.random.default_rng(3)
    for _ in range(20):
        sub = _random_lattice_subgraph(rng, p=0.4)
        sinks = {v for v in sub.vertices if max(abs(c) for c in v) == 2}
        base = count_disjoint_crossings(sub, Box(1), sinks)
        # add one absent edge
        candidates = []
        for x, y in sorted(sub.vertices):
            for dx, dy in ((1, 0), (0, 1)):
                q = (x + dx, y + dy)
                if q in sub.vertices:
                    e = canonical_edge((x, y), q)
                    if e not in sub.open_edges:
                        candidates.append(e)
        if not candidates:
            continue
        e = candidates[rng.integers(len(candidates))]
        bigger = OpenSubgraph(set(sub.vertices), set(sub.open_edges) | {e})
        assert count_disjoint_crossings(bigger, Box(1), sinks) >= base


def test_crossings_trivial_examples():
    sub = _subgraph(_path_edges((-3,), (-2,), (-1,), (0,), (1,), (2,), (3,)))
    shell = {(-3,), (3,)}
    assert count_disjoint_crossings(sub, Box(0), shell) == 2
    empty = OpenSubgraph({(-1,), (0,), (1,)}, set())
    assert count_disjoint_crossings(empty, Box(0), {(-1,), (1,)}) == 0


def test_crossings_reject_overlapping_shell():
    sub = _subgraph(_path_edges((0,), (1,)))
    with pytest.raises(UsageError):
        count_disjoint_crossings(sub, Box(1), {(1,)})


def test_crossings_match_exhaustive_oracle():
    rng = np.random.default_rng(11)
    for trial in range(40):
        # random graphs on a 5-vertex path-with-chords layout, <= 10 edges
        n = 5
        all_edges = list(itertools.combinations(range(n), 2))
        rng.shuffle(all_edges)
        chosen = all_edges[: int(rng.integers(3, 9))]
        g = FiniteGraph(vertices=list(range(n)), edges=sorted(chosen))
        config = (1 << g.m) - 1
        inner = [0]
        sinks = [n - 1]
        exhaustive = max_disjoint_crossings_exhaustive(g, config, inner, sinks)
        # abstract labels: wrap ints as 1-tuples for lattice-free use
        sub2 = OpenSubgraph(
            {(v,) for v in range(n)},
            {canonical_edge((i,), (j,)) for i, j in chosen},
        )
        flow = len(
            max_edge_disjoint(sub2, [(0,)], {(n - 1,)}, per_source_cap=None).paths
        )
        assert flow == exhaustive, (trial, flow, exhaustive)


def test_witness_paths_validated_on_every_call():
    rng = np.random.default_rng(23)
    for _ in range(30):
        sub = _random_lattice_subgraph(rng, p=0.5)
        sinks = {v for v in sub.vertices if max(abs(c) for c in v) == 2}
        w = max_edge_disjoint(sub, [(0, 0), (1, 1), (-1, -1)], sinks)
        w.validate(sub, sinks)


def test_multi_arm_single_point_reduces_to_one_arm():
    for seed in range(1000):
        cfg = FieldConfig(seed, 0.5)
        holds, trunc = multi_arm_event(NN2, cfg, 4, [(0, 0)], BUDGET)
        reached, rtrunc = one_arm_event(NN2, cfg, 4, BUDGET)
        assert holds == reached
        assert trunc == rtrunc


def test_multi_arm_translated_single_point():
    for seed in range(200):
        cfg = FieldConfig(seed, 0.5)
        y = (1, -1)
        holds, _ = multi_arm_event(NN2, cfg, 4, [y], BUDGET)
        cl = grow_cluster(NN2, cfg, y, Box(4), BUDGET, boundary_radius=4)
        assert holds == bool(cl.boundary_hits)


def test_multi_arm_p1_two_arms():
    holds, trunc = multi_arm_event(
        NN2, FieldConfig(3, 1.0), 4, [(-1, 0), (1, 0)], BUDGET
    )
    assert holds and not trunc


def test_multi_arm_p0_fails():
    holds, trunc = multi_arm_event(
        NN2, FieldConfig(3, 0.0), 4, [(-1, 0), (1, 0)], BUDGET
    )
    assert not holds and not trunc


def test_multi_arm_rejects_far_points():
    with pytest.raises(UsageError):
        multi_arm_event(NN2, FieldConfig(1, 0.5), 4, [(3, 3)], BUDGET)


def test_flow_certificate_matches_packing_on_lattice_samples():
    # the documented bridge: flow count == l iff edge-disjoint witness
    # packing succeeds, checked on sampled open subgraphs
    for seed in range(150):
        cfg = FieldConfig(seed, 0.55)
        points = [(-1, 0), (1, 0)]
        clusters = [
            grow_cluster(NN2, cfg, y, Box(3), BUDGET, boundary_radius=3)
            for y in points
        ]
        if any(not c.boundary_hits for c in clusters):
            continue
        sub = OpenSubgraph.from_clusters(clusters)
        sinks = set().union(*(c.boundary_hits for c in clusters))
        flow_holds = max_edge_disjoint(sub, points, sinks).count == 2

        vertices = sorted(sub.vertices)
        index = {v: i for i, v in enumerate(vertices)}
        g = FiniteGraph(
            vertices=vertices,
            edges=sorted((index[e.a], index[e.b]) for e in sub.open_edges),
            cap=10_000,
        )
        config = (1 << g.m) - 1
        arms = tuple(
            (index[y], tuple(sorted(index[t] for t in sinks))) for y in points
        )
        assert flow_holds == disjoint_paths_exist(g, config, arms), seed
