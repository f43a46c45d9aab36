"""Exact ground truth on small finite graphs by full configuration
enumeration.

Every probability or expectation is a sum over all 2^m edge configurations
with weight p^(#open) (1-p)^(#closed).  Disjoint-occurrence events are
decided per configuration by exhaustive witness search (edge-disjoint path
packing), deliberately independent of the max-flow implementation in
``perclab.disjoint_paths`` so the two can cross-validate each other.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ResourceError, UsageError
from .lattice import LatticeSpec, neighbor_offsets, translate

DEFAULT_ENUMERATION_CAP = 20


@njit(cache=True)
def _labels_all_configs(n_configs, n_vertices, eu, ev, active):
    """Component label of every vertex in every configuration.

    Labels are root indices of a union-find run over the active open edges;
    two vertices are connected iff their labels agree.
    """
    out = np.empty((n_configs, n_vertices), dtype=np.int16)
    parent = np.empty(n_vertices, dtype=np.int16)
    m = eu.shape[0]
    for c in range(n_configs):
        for v in range(n_vertices):
            parent[v] = v
        for b in range(m):
            if not active[b]:
                continue
            if not (c >> b) & 1:
                continue
            ra = eu[b]
            while parent[ra] != ra:
                parent[ra] = parent[parent[ra]]
                ra = parent[ra]
            rb = ev[b]
            while parent[rb] != rb:
                parent[rb] = parent[parent[rb]]
                rb = parent[rb]
            if ra != rb:
                parent[rb] = ra
        for v in range(n_vertices):
            r = v
            while parent[r] != r:
                r = parent[r]
            out[c, v] = r
    return out


@dataclass
class FiniteGraph:
    """A small simple graph whose 2^m configurations can be enumerated.

    ``vertices`` may be any hashable labels (lattice Points in the region
    helpers); ``edges`` are index pairs into the vertex list.
    """

    vertices: list
    edges: list[tuple[int, int]]
    cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self) -> None:
        m = len(self.edges)
        if m > self.cap:
            raise ResourceError(
                f"graph has {m} edges, above the enumeration cap {self.cap}"
            )
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise UsageError("self-loops are not allowed")
            if not (0 <= i < len(self.vertices) and 0 <= j < len(self.vertices)):
                raise UsageError(f"edge ({i},{j}) references a missing vertex")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise UsageError(f"duplicate edge ({i},{j})")
            seen.add(key)
        self._labels: np.ndarray | None = None
        self._sub_labels: dict = {}

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def n_configs(self) -> int:
        return 1 << len(self.edges)

    def index_of(self, vertex) -> int:
        return self.vertices.index(vertex)

    def labels(self, edge_subset: frozenset[int] | None = None) -> np.ndarray:
        """(2^m, n) component labels, optionally using only a subset of the
        edge columns (restricted connectivity)."""
        if edge_subset is None:
            if self._labels is None:
                self._labels = self._compute(None)
            return self._labels
        key = edge_subset
        if key not in self._sub_labels:
            self._sub_labels[key] = self._compute(edge_subset)
        return self._sub_labels[key]

    def _compute(self, edge_subset) -> np.ndarray:
        eu = np.array([e[0] for e in self.edges], dtype=np.int16)
        ev = np.array([e[1] for e in self.edges], dtype=np.int16)
        active = np.ones(self.m, dtype=np.bool_)
        if edge_subset is not None:
            for b in range(self.m):
                active[b] = b in edge_subset
        return _labels_all_configs(
            self.n_configs, len(self.vertices), eu, ev, active
        )

    def config_weights(self, p: float) -> np.ndarray:
        """Probability of each configuration under the product measure."""
        m = self.m
        counts = np.zeros(self.n_configs, dtype=np.int64)
        for b in range(m):
            counts += (np.arange(self.n_configs) >> b) & 1
        pk = np.array([p**k * (1 - p) ** (m - k) for k in range(m + 1)])
        return pk[counts]

    def open_adjacency(self, config: int) -> dict[int, list[tuple[int, int]]]:
        """vertex -> [(neighbor, edge_bit)] over the open edges of config."""
        adj: dict[int, list[tuple[int, int]]] = {}
        for b, (i, j) in enumerate(self.edges):
            if (config >> b) & 1:
                adj.setdefault(i, []).append((j, b))
                adj.setdefault(j, []).append((i, b))
        return adj

    def to_json(self) -> dict:
        return {
            "vertices": [list(v) if isinstance(v, tuple) else v for v in self.vertices],
            "edges": [[i, j] for i, j in self.edges],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteGraph":
        vertices = [tuple(v) if isinstance(v, list) else v for v in obj["vertices"]]
        edges = [(int(i), int(j)) for i, j in obj["edges"]]
        return cls(vertices=vertices, edges=edges)


def lattice_region_graph(spec: LatticeSpec, radius: int, cap: int = 64) -> FiniteGraph:
    """The finite graph induced on Q_radius: the desk-scale stand-in for a
    lattice region (cap raised by callers who know the cost)."""
    pts = sorted(
        itertools.product(range(-radius, radius + 1), repeat=spec.dimension)
    )
    index = {pt: i for i, pt in enumerate(pts)}
    offsets = neighbor_offsets(spec.dimension, spec.reach)
    edges = []
    for pt in pts:
        for off in offsets:
            nbr = translate(pt, off)
            if nbr in index and pt < nbr:
                edges.append((index[pt], index[nbr]))
    return FiniteGraph(vertices=pts, edges=sorted(edges), cap=cap)


# -- events -------------------------------------------------------------------


@dataclass(frozen=True)
class EventPredicate:
    """An event over configurations, evaluated to a boolean mask of length
    2^m.  ``kind`` selects the semantics:

    - ("connect", a, b): a <-> b
    - ("connect_to_set", a, (s1, ...)): a <-> some s_i
    - ("size_at_least", a, k): |C(a)| >= k
    - ("multi_arm_disjoint", ((src, sinks), ...)): the events
      {src_i <-> sinks_i} occur disjointly (edge-disjoint witnesses)
    - ("custom", mask_tuple): explicit indicator table
    """

    kind: tuple

    @classmethod
    def connect(cls, a: int, b: int) -> "EventPredicate":
        return cls(("connect", a, b))

    @classmethod
    def connect_to_set(cls, a: int, targets) -> "EventPredicate":
        return cls(("connect_to_set", a, tuple(sorted(targets))))

    @classmethod
    def size_at_least(cls, a: int, k: int) -> "EventPredicate":
        return cls(("size_at_least", a, k))

    @classmethod
    def multi_arm_disjoint(cls, arms) -> "EventPredicate":
        return cls(
            ("multi_arm_disjoint", tuple((a, tuple(sorted(s))) for a, s in arms))
        )

    @classmethod
    def custom(cls, mask) -> "EventPredicate":
        return cls(("custom", tuple(bool(x) for x in mask)))

    def is_connection(self) -> bool:
        return self.kind[0] in ("connect", "connect_to_set")

    def arm(self) -> tuple[int, tuple[int, ...]]:
        """(source, sinks) of a connection event."""
        if self.kind[0] == "connect":
            return self.kind[1], (self.kind[2],)
        if self.kind[0] == "connect_to_set":
            return self.kind[1], self.kind[2]
        raise UsageError(f"{self.kind[0]} is not a connection event")

    def mask(self, g: FiniteGraph) -> np.ndarray:
        kind = self.kind[0]
        if kind == "connect":
            labels = g.labels()
            return labels[:, self.kind[1]] == labels[:, self.kind[2]]
        if kind == "connect_to_set":
            labels = g.labels()
            a = self.kind[1]
            out = np.zeros(g.n_configs, dtype=bool)
            for t in self.kind[2]:
                out |= labels[:, a] == labels[:, t]
            return out
        if kind == "size_at_least":
            labels = g.labels()
            a, k = self.kind[1], self.kind[2]
            sizes = (labels == labels[:, a][:, None]).sum(axis=1)
            return sizes >= k
        if kind == "multi_arm_disjoint":
            arms = self.kind[1]
            masks = [
                EventPredicate.connect_to_set(a, s).mask(g) for a, s in arms
            ]
            candidates = np.logical_and.reduce(masks)
            out = np.zeros(g.n_configs, dtype=bool)
            for c in np.nonzero(candidates)[0]:
                out[c] = disjoint_paths_exist(g, int(c), arms)
            return out
        if kind == "custom":
            table = np.array(self.kind[1], dtype=bool)
            if table.shape != (g.n_configs,):
                raise UsageError("custom mask length does not match the graph")
            return table
        raise UsageError(f"unknown event kind {kind!r}")


def is_increasing(g: FiniteGraph, mask: np.ndarray) -> bool:
    """Bit-flip monotonicity: opening any closed edge never destroys the
    event."""
    idx = np.arange(g.n_configs)
    for b in range(g.m):
        closed = (idx >> b) & 1 == 0
        if np.any(mask[idx[closed]] & ~mask[idx[closed] | (1 << b)]):
            return False
    return True


def disjoint_paths_exist(g: FiniteGraph, config: int, arms) -> bool:
    """Exhaustive search for pairwise edge-disjoint open witness paths, one
    per (source, sinks) arm.  Independent of the max-flow module."""
    adj = g.open_adjacency(config)

    def backtrack(i: int, used: frozenset[int]) -> bool:
        if i == len(arms):
            return True
        src, sinks = arms[i]
        sinkset = set(sinks)

        def dfs(v: int, path_edges: frozenset[int], visited: frozenset[int]) -> bool:
            if v in sinkset:
                return backtrack(i + 1, used | path_edges)
            for w, b in adj.get(v, ()):
                if b in used or b in path_edges or w in visited:
                    continue
                if dfs(w, path_edges | {b}, visited | {w}):
                    return True
            return False

        return dfs(src, frozenset(), frozenset([src]))

    return backtrack(0, frozenset())


def max_disjoint_crossings_exhaustive(
    g: FiniteGraph, config: int, sources, sinks
) -> int:
    """Largest k such that k edge-disjoint open paths run from the source
    set to the sink set (paths may share start vertices).  Brute force."""
    sinks = tuple(sorted(set(sinks)))
    if set(sources) & set(sinks):
        raise UsageError("source and sink sets must be disjoint")
    adj = g.open_adjacency(config)
    live = tuple(sorted(s for s in set(sources) if adj.get(s)))
    # crossings are bounded by the open edges incident to the sink set
    bound = sum(
        1
        for b, (i, j) in enumerate(g.edges)
        if (config >> b) & 1 and (i in set(sinks) or j in set(sinks))
    )
    k = 0
    while k < bound:
        feasible = any(
            disjoint_paths_exist(g, config, tuple((s, sinks) for s in combo))
            for combo in itertools.combinations_with_replacement(live, k + 1)
        )
        if not feasible:
            return k
        k += 1
    return k


def raw_disjoint_mask(g: FiniteGraph, events: list[EventPredicate]) -> np.ndarray:
    """The subset-split definition of disjoint occurrence for increasing
    events: recursively split the open edge set into disjoint witness sets.

    For each configuration c, the event holds iff some U inside the open
    set satisfies the first event with exactly U open, and the remaining
    events occur disjointly inside open(c) minus U.
    """
    masks = [ev.mask(g) for ev in events]
    for ev, mask in zip(events, masks):
        if not is_increasing(g, mask):
            raise UsageError("raw split semantics implemented for increasing events")

    def rec(level: int, c: int) -> bool:
        if level == len(events) - 1:
            return bool(masks[level][c])
        u = c
        while True:
            if masks[level][u] and rec(level + 1, c & ~u):
                return True
            if u == 0:
                break
            u = (u - 1) & c
        return False

    out = np.zeros(g.n_configs, dtype=bool)
    candidates = np.logical_and.reduce(masks)
    for c in np.nonzero(candidates)[0]:
        out[c] = rec(0, int(c))
    return out


# -- exact quantities ---------------------------------------------------------


def _fsum_where(weights: np.ndarray, mask: np.ndarray) -> float:
    # Compensated summation keeps the enumeration totals at 1e-12 accuracy.
    return math.fsum(weights[mask])


def exact_probability(g: FiniteGraph, p: float, ev: EventPredicate) -> float:
    """P(ev) under the product measure, by full enumeration."""
    if not 0.0 <= p <= 1.0:
        raise UsageError("p must be in [0, 1]")
    return _fsum_where(g.config_weights(p), ev.mask(g))


def exact_disjoint_occurrence(
    g: FiniteGraph, p: float, events: list[EventPredicate]
) -> float:
    """P(A_1 o ... o A_k) for connection events, by per-configuration
    exhaustive witness packing."""
    for ev in events:
        if not ev.is_connection():
            raise UsageError("exact_disjoint_occurrence handles connection events")
    arms = tuple(ev.arm() for ev in events)
    ev = EventPredicate.multi_arm_disjoint(arms)
    return _fsum_where(g.config_weights(p), ev.mask(g))


def verify_bk(
    g: FiniteGraph, p: float, a: EventPredicate, b: EventPredicate
) -> tuple[float, float, bool]:
    """(P(A o B), P(A) P(B), holds) for connection events."""
    lhs = exact_disjoint_occurrence(g, p, [a, b])
    rhs = exact_probability(g, p, a) * exact_probability(g, p, b)
    return lhs, rhs, lhs <= rhs + 1e-12


def verify_fkg(
    g: FiniteGraph, p: float, a: EventPredicate, b: EventPredicate
) -> tuple[float, float, bool]:
    """(P(A and B), P(A) P(B), holds) for increasing events."""
    ma, mb = a.mask(g), b.mask(g)
    if not is_increasing(g, ma) or not is_increasing(g, mb):
        raise UsageError("verify_fkg requires increasing events")
    w = g.config_weights(p)
    lhs = _fsum_where(w, ma & mb)
    rhs = _fsum_where(w, ma) * _fsum_where(w, mb)
    return lhs, rhs, lhs >= rhs - 1e-12


def exact_expectation(
    g: FiniteGraph,
    p: float,
    statistic: tuple,
    fixed: dict[int, bool] | None = None,
) -> float:
    """Exact expectation of a counting statistic, optionally conditioned on
    pinned edge states (``fixed``: edge bit -> open?).

    Statistics (vertex arguments are indices into g.vertices):
    - ("connected_count", a, targets): |{t : a <-> t}|, e.g. X_j with
      targets the boundary vertices, A_j with targets the annulus
    - ("connected_count_sub", a, targets, edge_bits): as above but using
      only the given edges (restricted connectivity inside a sub-box)
    - ("mass", a, box): |C(a) cap box|
    - ("mass_sq", a, box): |C(a) cap box|^2 (the two-point double sum)
    """
    kind = statistic[0]
    if kind == "connected_count_sub":
        labels = g.labels(frozenset(statistic[3]))
        a, targets = statistic[1], statistic[2]
    else:
        labels = g.labels()
        a, targets = statistic[1], statistic[2]
    same = labels == labels[:, a][:, None]
    counts = np.zeros(g.n_configs, dtype=np.int64)
    for t in targets:
        counts += same[:, t]
    if kind == "mass_sq":
        counts = counts**2
    elif kind not in ("connected_count", "connected_count_sub", "mass"):
        raise UsageError(f"unknown statistic {kind!r}")

    weights = g.config_weights(p)
    if fixed:
        sel = np.ones(g.n_configs, dtype=bool)
        idx = np.arange(g.n_configs)
        scale = 1.0
        for b, state in fixed.items():
            bit = (idx >> b) & 1
            sel &= bit == (1 if state else 0)
            scale *= p if state else (1 - p)
        return math.fsum(weights[sel] * counts[sel]) / scale
    return math.fsum(weights * counts)


def exact_conditional_probability(
    g: FiniteGraph, p: float, ev: EventPredicate, fixed: dict[int, bool]
) -> float:
    """P(ev | pinned edge states), by enumeration over the free edges."""
    mask = ev.mask(g)
    weights = g.config_weights(p)
    idx = np.arange(g.n_configs)
    sel = np.ones(g.n_configs, dtype=bool)
    scale = 1.0
    for b, state in fixed.items():
        bit = (idx >> b) & 1
        sel &= bit == (1 if state else 0)
        scale *= p if state else (1 - p)
    return _fsum_where(weights, mask & sel) / scale


def corpus_path() -> str:
    from importlib.resources import files

    return str(files("perclab").joinpath("data/oracle_corpus.json"))


def load_corpus(path: str | None = None) -> list[dict]:
    """Bundled small graphs with named events and frozen exact values."""
    with open(path or corpus_path()) as fh:
        return json.load(fh)
