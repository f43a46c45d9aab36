"""Edge-disjoint open-path certificates via unit-capacity max-flow.

For connection events, the disjoint occurrence of {y_1 <-> S}, ...,
{y_l <-> S} is certified by l pairwise edge-disjoint open paths (Menger);
the flow network puts one unit of capacity on every open edge and one unit
on each super-source arc, so each source spends its capacity on at most one
path.  The oracle module re-derives the same events by exhaustive witness
search, independently of this code.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .errors import UsageError
from .lattice import (
    Box,
    Edge,
    LatticeSpec,
    Point,
    canonical_edge,
    neighbor_offsets,
    translate,
)
from .random_field import field_state
from .explorer import GrowthBudget, grow_cluster

_SOURCE = ("__source__",)
_SINK = ("__sink__",)


@dataclass
class OpenSubgraph:
    """A revealed open subgraph: the witness substrate for path searches."""

    vertices: set[Point]
    open_edges: set[Edge]

    def __post_init__(self) -> None:
        for e in self.open_edges:
            if e.a not in self.vertices or e.b not in self.vertices:
                raise UsageError(f"edge {e} references a vertex outside the subgraph")

    @classmethod
    def from_cluster(cls, cluster) -> "OpenSubgraph":
        return cls(set(cluster.members), set(cluster.open_edges))

    @classmethod
    def from_clusters(cls, clusters) -> "OpenSubgraph":
        vertices: set[Point] = set()
        edges: set[Edge] = set()
        for c in clusters:
            vertices.update(c.members)
            edges.update(c.open_edges)
        return cls(vertices, edges)

    @classmethod
    def from_region(
        cls, spec: LatticeSpec, config, center: Point, radius: int
    ) -> "OpenSubgraph":
        """Reveal every edge of center+Q_radius and keep the open ones."""
        d = spec.dimension
        pts = [
            translate(center, off)
            for off in itertools.product(range(-radius, radius + 1), repeat=d)
        ]
        index = set(pts)
        offsets = neighbor_offsets(d, spec.reach)
        edges = set()
        for pt in pts:
            for off in offsets:
                nbr = translate(pt, off)
                if nbr <= pt or nbr not in index:
                    continue
                e = canonical_edge(pt, nbr)
                if field_state(config, e):
                    edges.add(e)
        return cls(index, edges)


@dataclass
class WitnessSet:
    """Edge-disjoint open paths certifying a disjoint connection event."""

    paths: list[list[Point]]

    @property
    def count(self) -> int:
        return len(self.paths)

    def validate(self, subgraph: OpenSubgraph, sinks: set[Point]) -> None:
        used: set[Edge] = set()
        for path in self.paths:
            if path[-1] not in sinks:
                raise AssertionError(f"path does not end in the sink set: {path}")
            for a, b in zip(path, path[1:]):
                e = canonical_edge(a, b)
                if e not in subgraph.open_edges:
                    raise AssertionError(f"path uses a non-open edge {e}")
                if e in used:
                    raise AssertionError(f"paths share edge {e}")
                used.add(e)


def _max_flow_paths(
    subgraph: OpenSubgraph,
    sources: list[Point],
    sinks: set[Point],
    source_cap: int | None,
) -> list[list[Point]]:
    """Unit-capacity augmenting-path max-flow; returns edge-disjoint open
    paths realizing the flow value.

    Every open edge carries one unit in total (antiparallel residual units
    cancel); ``source_cap`` is the per-source arc capacity (None means
    unlimited, so paths may share a starting vertex).
    """
    edges = sorted(subgraph.open_edges, key=lambda e: (e.a, e.b))
    ordered_sources = []
    for s in sources:
        if s not in ordered_sources:
            ordered_sources.append(s)

    cap: dict[tuple, int] = {}
    adj: dict = {}

    def add_arc(u, v, c: int) -> None:
        if (u, v) not in cap:
            cap[(u, v)] = 0
            adj.setdefault(u, []).append(v)
        if (v, u) not in cap:
            cap[(v, u)] = 0
            adj.setdefault(v, []).append(u)
        cap[(u, v)] += c

    big = len(edges) + len(ordered_sources) + 1
    src_cap = source_cap if source_cap is not None else big
    for e in edges:
        add_arc(e.a, e.b, 1)
        add_arc(e.b, e.a, 1)
    live_sources = [s for s in ordered_sources if s in subgraph.vertices]
    for s in live_sources:
        add_arc(_SOURCE, s, src_cap)
    for t in sorted(sinks):
        if t in subgraph.vertices:
            add_arc(t, _SINK, big)

    while True:
        parent: dict = {_SOURCE: _SOURCE}
        queue = deque([_SOURCE])
        while queue and _SINK not in parent:
            u = queue.popleft()
            for v in adj.get(u, ()):
                if v not in parent and cap.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if _SINK not in parent:
            break
        v = _SINK
        while v != _SOURCE:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] += 1
            v = u

    # Net flow per undirected edge: pattern (0, 2) in the residual caps.
    net: dict = {}
    for e in edges:
        if cap[(e.a, e.b)] == 0 and cap[(e.b, e.a)] == 2:
            net.setdefault(e.a, []).append(e.b)
        elif cap[(e.b, e.a)] == 0 and cap[(e.a, e.b)] == 2:
            net.setdefault(e.b, []).append(e.a)

    paths: list[list[Point]] = []
    for s in live_sources:
        n_started = src_cap - cap[(_SOURCE, s)]
        for _ in range(n_started):
            path = [s]
            v = s
            while v not in sinks:
                v = net[v].pop()
                path.append(v)
            paths.append(path)
    return paths


def max_edge_disjoint(
    subgraph: OpenSubgraph,
    sources: list[Point],
    sinks: set[Point],
    per_source_cap: int = 1,
) -> WitnessSet:
    """Maximum family of edge-disjoint open paths, at most ``per_source_cap``
    starting at each source, each ending in ``sinks``.

    Sources outside the subgraph contribute nothing (not an error); empty
    sinks give count 0.  A count equal to the number of sources certifies
    the disjoint occurrence of the corresponding connection events: each
    source spends its unit of super-source capacity on exactly one path.
    """
    if len(set(sources)) != len(sources):
        raise UsageError("sources must be distinct")
    paths = _max_flow_paths(subgraph, list(sources), set(sinks), per_source_cap)
    return WitnessSet(paths=paths)


def count_disjoint_crossings(
    subgraph: OpenSubgraph, inner: Box, outer_shell: set[Point]
) -> int:
    """Maximum number of edge-disjoint open paths from the inner box to the
    outer shell; paths may share starting vertices but not edges."""
    starts = sorted(v for v in subgraph.vertices if inner.contains(v))
    shell = set(outer_shell)
    if any(inner.contains(v) for v in shell):
        raise UsageError(
            "inner box meets the outer shell; enlarge the envelope"
        )
    paths = _max_flow_paths(subgraph, starts, shell, None)
    return len(paths)


def multi_arm_event(
    spec: LatticeSpec,
    config,
    r: int,
    points: list[Point],
    budget: GrowthBudget,
) -> tuple[bool, bool]:
    """Disjoint occurrence of {y_i <-> boundary of Q_r} for all given
    points: edge-disjoint open paths inside Q_r, one from each y_i.

    Grows the union of the clusters C(y_i; Q_r) (shared edge reveals) and
    runs the flow certificate over the revealed open subgraph.  For a
    single point this reduces to the one-arm event from y_1.  Extra open
    edges can only increase the certificate, so a certified ``holds``
    stands even when growth was truncated; a failed certificate under
    truncation is indeterminate, which ``truncated`` flags.
    """
    if not points:
        raise UsageError("multi_arm_event requires at least one point")
    if len(set(points)) != len(points):
        raise UsageError("points must be distinct")
    if r < 1:
        raise UsageError("multi_arm_event requires r >= 1")
    for y in points:
        if len(y) != spec.dimension:
            raise UsageError(f"point {y} does not match spec dimension")
        if sum(c * c for c in y) > (r / 2) ** 2:
            raise UsageError(f"point {y} lies outside B(0, r/2)")
    region = Box(r)
    clusters = [
        grow_cluster(spec, config, y, region, budget, boundary_radius=r)
        for y in points
    ]
    truncated = any(c.truncated for c in clusters)
    if any(not c.truncated and not c.boundary_hits for c in clusters):
        return False, truncated
    if any(not c.boundary_hits for c in clusters):
        # Only truncated sources failed to reach: undecided.
        return False, True
    subgraph = OpenSubgraph.from_clusters(clusters)
    sinks = set().union(*(c.boundary_hits for c in clusters))
    witness = max_edge_disjoint(subgraph, list(points), sinks, per_source_cap=1)
    return witness.count >= len(points), truncated
