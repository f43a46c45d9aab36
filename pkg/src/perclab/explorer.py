"""Lazy cluster growth, boundary censuses, regularity events, and the
box-by-box exploration process.

Everything here is a readable pure-Python reference working on one sample
at a time; the Monte Carlo estimators use the numba kernels in
``perclab._kernels``, which are tested against these functions outcome by
outcome.  Both query the same stateless edge hash, so exploration order
never changes a result.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import ResourceError, UsageError
from .lattice import (
    Box,
    Edge,
    LatticeSpec,
    Point,
    boundary_membership,
    canonical_edge,
    neighbor_offsets,
    origin,
    translate,
)
from .random_field import FieldConfig, field_state, resample_seed

# Default memory guard for region-revealing operations (points).
DEFAULT_REGION_GUARD = 2_000_000


@dataclass(frozen=True)
class GrowthBudget:
    """Caps making growth on the infinite lattice safe."""

    max_vertices: int
    max_graph_radius: int | None = None

    def __post_init__(self) -> None:
        if self.max_vertices < 1:
            raise UsageError("budget.max_vertices must be >= 1")
        if self.max_graph_radius is not None and self.max_graph_radius < 0:
            raise UsageError("budget.max_graph_radius must be >= 0")


@dataclass
class Cluster:
    """The realized cluster C(origin; region) with its open-edge witness set.

    ``members`` maps each vertex to its discovery distance in the graph
    metric.  When ``truncated`` is False, members is exactly the cluster of
    the origin within the region.
    """

    origin_point: Point
    members: dict[Point, int]
    open_edges: set[Edge]
    region: Box | None
    truncated: bool
    truncation_reason: str | None  # "volume budget" | "radius budget"
    boundary_hits: set[Point] = field(default_factory=set)

    @property
    def size(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        return {
            "origin": list(self.origin_point),
            "members": [
                {"point": list(pt), "distance": self.members[pt]}
                for pt in sorted(self.members)
            ],
            "open_edges": [
                [list(e.a), list(e.b)]
                for e in sorted(self.open_edges, key=lambda e: (e.a, e.b))
            ],
            "region": None
            if self.region is None
            else {
                "radius": self.region.radius,
                "center": list(self.region.center)
                if self.region.center is not None
                else None,
            },
            "truncated": self.truncated,
            "truncation_reason": self.truncation_reason,
            "boundary_hits": [list(p) for p in sorted(self.boundary_hits)],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class BoundaryCensus:
    """Per-sample boundary counts: X_j inside Q_j, A_j in the annulus
    Q_{j+L} \\ Q_j."""

    j: int
    L: int
    x_j: int
    a_j: int
    a_j_truncated: bool
    one_arm: bool


@dataclass(frozen=True)
class RegularityReport:
    """Raw per-sample regularity measurements at scale s around x."""

    x: Point
    s: int
    t_s_holds: bool
    t_s_loc_holds: bool
    disjoint_crossings: int
    inner_count: int
    t_s_truncated: bool = False


@dataclass(frozen=True)
class ExplorationStep:
    box_anchor: Point
    newly_activated: tuple[Point, ...]
    boundary_touch: bool


@dataclass
class ExplorationTrace:
    """Record of the box-by-box exploration of the cluster of 0 in Q_j."""

    shift: Point
    box_scale: int
    j: int
    steps: list[ExplorationStep]
    explored: set[Point]
    tau: int
    boundary_hits: set[Point]

    def to_json(self) -> dict:
        return {
            "shift": list(self.shift),
            "box_scale": self.box_scale,
            "j": self.j,
            "steps": [
                {
                    "box": list(s.box_anchor),
                    "activated": [list(a) for a in s.newly_activated],
                    "boundary_touch": s.boundary_touch,
                }
                for s in self.steps
            ],
            "explored": [list(a) for a in sorted(self.explored)],
            "tau": self.tau,
            "boundary_hits": [list(p) for p in sorted(self.boundary_hits)],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def grow_cluster(
    spec: LatticeSpec,
    config,
    origin_point: Point,
    region: Box | None,
    budget: GrowthBudget,
    boundary_radius: int | None = None,
) -> Cluster:
    """Breadth-first growth of C(origin; region), revealing each candidate
    edge at most once through the stateless field.

    When ``boundary_radius`` is given, members on the boundary of
    Q_boundary_radius are collected into ``boundary_hits``.
    """
    if len(origin_point) != spec.dimension:
        raise UsageError("origin dimension does not match spec")
    if region is not None and not region.contains(origin_point):
        raise UsageError(f"origin {origin_point} outside region {region}")

    offsets = neighbor_offsets(spec.dimension, spec.reach)
    members: dict[Point, int] = {origin_point: 0}
    revealed: dict[Edge, bool] = {}
    open_edges: set[Edge] = set()
    boundary_hits: set[Point] = set()
    truncated = False
    reason: str | None = None

    def is_open(a: Point, b: Point) -> bool:
        e = canonical_edge(a, b)
        state = revealed.get(e)
        if state is None:
            state = field_state(config, e)
            revealed[e] = state
        if state:
            open_edges.add(e)
        return state

    if boundary_radius is not None and boundary_membership(
        spec, boundary_radius, origin_point
    ):
        boundary_hits.add(origin_point)

    queue: deque[Point] = deque([origin_point])
    while queue:
        current = queue.popleft()
        dist = members[current]
        at_radius_cap = (
            budget.max_graph_radius is not None
            and dist >= budget.max_graph_radius
        )
        for off in offsets:
            nbr = translate(current, off)
            if region is not None and not region.contains(nbr):
                continue
            if not is_open(current, nbr):
                continue
            if nbr in members:
                continue
            if at_radius_cap:
                truncated = True
                reason = "radius budget"
                continue
            if len(members) >= budget.max_vertices:
                truncated = True
                reason = "volume budget"
                queue.clear()
                break
            members[nbr] = dist + 1
            queue.append(nbr)
            if boundary_radius is not None and boundary_membership(
                spec, boundary_radius, nbr
            ):
                boundary_hits.add(nbr)
    return Cluster(
        origin_point=origin_point,
        members=members,
        open_edges=open_edges,
        region=region,
        truncated=truncated,
        truncation_reason=reason,
        boundary_hits=boundary_hits,
    )


def one_arm_event(
    spec: LatticeSpec, config, r: int, budget: GrowthBudget
) -> tuple[bool, bool]:
    """(reached, truncated): is 0 connected to the boundary of Q_r inside
    Q_r?  Growth restricted to Q_r decides the event (a witness path's
    prefix up to its first boundary hit stays in Q_r); ``truncated`` means
    the volume budget bit before any boundary hit, leaving it undecided."""
    if r < 1:
        raise UsageError("one_arm_event requires r >= 1")
    cluster = grow_cluster(
        spec, config, origin(spec.dimension), Box(r), budget, boundary_radius=r
    )
    reached = bool(cluster.boundary_hits)
    truncated = cluster.truncated and not reached
    return reached, truncated


def census(
    spec: LatticeSpec,
    config,
    j: int,
    L: int,
    budget: GrowthBudget,
    annulus_buffer: int | None = None,
) -> BoundaryCensus:
    """Two-phase boundary census.

    Phase 1 grows C(0; Q_j) and counts X_j, the distinct boundary vertices
    of Q_j reached.  Phase 2 re-grows without the Q_j restriction but
    confined to Q_{j+L+buffer} (buffer defaults to L) and counts A_j, the
    annulus vertices Q_{j+L} \\ Q_j reached.  A_j is exact unless the
    confinement envelope or the volume budget bit while the annulus was
    still incomplete; ``a_j_truncated`` records that, never silently.
    """
    if j < 1:
        raise UsageError("census requires j >= 1")
    if L < 0:
        raise UsageError("census requires L >= 0")
    buf = L if annulus_buffer is None else annulus_buffer
    if buf < 0:
        raise UsageError("annulus_buffer must be >= 0")
    o = origin(spec.dimension)
    phase1 = grow_cluster(spec, config, o, Box(j), budget, boundary_radius=j)
    x_j = len(phase1.boundary_hits)
    a_j = 0
    a_truncated = phase1.truncated
    if L > 0:
        env = j + L + buf
        phase2 = grow_cluster(spec, config, o, Box(env), budget)
        a_j = sum(
            1 for y in phase2.members if j < max(abs(c) for c in y) <= j + L
        )
        shell_touched = any(
            max(abs(c) for c in y) > env - spec.reach for y in phase2.members
        )
        annulus_size = (2 * (j + L) + 1) ** spec.dimension - (
            2 * j + 1
        ) ** spec.dimension
        maybe_short = phase2.truncated or shell_touched
        a_truncated = a_truncated or (maybe_short and a_j < annulus_size)
    return BoundaryCensus(
        j=j, L=L, x_j=x_j, a_j=a_j, a_j_truncated=a_truncated, one_arm=x_j >= 1
    )


def _component_partition(
    spec: LatticeSpec,
    config,
    center: Point,
    radius: int,
    guard: int = DEFAULT_REGION_GUARD,
) -> dict[Point, int]:
    """Reveal every edge inside center+Q_radius and label open components."""
    d = spec.dimension
    if (2 * radius + 1) ** d > guard:
        raise ResourceError(f"region Q_{radius} in d={d} exceeds the memory guard")
    pts = [
        translate(center, off)
        for off in itertools.product(range(-radius, radius + 1), repeat=d)
    ]
    index = {pt: i for i, pt in enumerate(pts)}
    parent = list(range(len(pts)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    offsets = neighbor_offsets(d, spec.reach)
    for pt in pts:
        for off in offsets:
            nbr = translate(pt, off)
            if nbr <= pt or nbr not in index:
                continue
            if field_state(config, canonical_edge(pt, nbr)):
                ra, rb = find(index[pt]), find(index[nbr])
                if ra != rb:
                    parent[rb] = ra
    return {pt: find(index[pt]) for pt in pts}


def _t_loc_parts(
    spec: LatticeSpec,
    config,
    x: Point,
    s: int,
    env_r: int,
    guard: int,
) -> tuple[int, int, bool]:
    """(inner_count, disjoint_crossings, t_loc_holds) at scale s around x
    with the local envelope x+Q_env_r."""
    from .disjoint_paths import OpenSubgraph, count_disjoint_crossings

    labels = _component_partition(spec, config, x, env_r, guard=guard)
    ls = math.log(s)
    inner_box = Box(s, x)
    counts: dict[int, int] = {}
    for pt, lab in labels.items():
        if inner_box.contains(pt):
            counts[lab] = counts.get(lab, 0) + 1
    inner_count = max(counts.values()) if counts else 0
    holds_a = inner_count < s**4 * ls**4

    subgraph = OpenSubgraph.from_region(spec, config, x, env_r)
    shell = {
        pt
        for pt in labels
        if max(abs(c - xc) for c, xc in zip(pt, x)) > env_r - spec.reach
    }
    crossings = count_disjoint_crossings(subgraph, inner_box, shell)
    holds_b = crossings <= ls**3
    return inner_count, crossings, holds_a and holds_b


def regularity_check(
    spec: LatticeSpec,
    config,
    x: Point,
    s: int,
    envelope_exponent: float = 2.0,
    envelope_radius: int | None = None,
    budget: GrowthBudget | None = None,
    region_guard: int = DEFAULT_REGION_GUARD,
) -> RegularityReport:
    """Raw regularity measurements at scale s around x.

    (a) inner_count: largest |component cap (x+Q_s)| over open components of
        the revealed envelope x+Q_E, E = s^envelope_exponent (or the explicit
        ``envelope_radius``), compared against s^4 log^4 s;
    (b) disjoint_crossings: maximum number of edge-disjoint open paths from
        x+Q_s to the envelope boundary, compared against log^3 s.
    t_s_loc_holds = (a) and (b).  t_s_holds compares |C(x) cap (x+Q_s)|
    against s^4 log^7 s using unrestricted budget-capped growth.
    Thresholds use the natural logarithm; "<" is strict.
    """
    if s < 2:
        raise UsageError("regularity_check requires s >= 2")
    if len(x) != spec.dimension:
        raise UsageError("x dimension does not match spec")
    env_r = (
        envelope_radius
        if envelope_radius is not None
        else max(int(s**envelope_exponent), s + 1)
    )
    if env_r <= s:
        raise UsageError("envelope must be strictly larger than the inner box")
    inner_count, crossings, t_loc = _t_loc_parts(
        spec, config, x, s, env_r, region_guard
    )

    grow_budget = budget or GrowthBudget(max_vertices=200_000)
    full = grow_cluster(spec, config, x, None, grow_budget)
    inner_box = Box(s, x)
    mass = sum(1 for pt in full.members if inner_box.contains(pt))
    t_s_holds = mass < s**4 * math.log(s) ** 7

    return RegularityReport(
        x=x,
        s=s,
        t_s_holds=t_s_holds,
        t_s_loc_holds=t_loc,
        disjoint_crossings=crossings,
        inner_count=inner_count,
        t_s_truncated=full.truncated,
    )


class FrozenFieldView:
    """Field view with a pinned set of edge states; every other edge falls
    through to the underlying configuration."""

    def __init__(self, config: FieldConfig, frozen: dict[Edge, bool]):
        self._config = config
        self.frozen = frozen
        self.seed = config.seed
        self.p = config.p
        self.sample_index = config.sample_index

    def state(self, e: Edge) -> bool:
        hit = self.frozen.get(e)
        if hit is not None:
            return hit
        from .random_field import edge_open

        return edge_open(self._config, e)


def spanning_determined_edges(
    spec: LatticeSpec,
    config,
    x: Point,
    inner_r: int,
    outer_r: int,
    guard: int = DEFAULT_REGION_GUARD,
) -> dict[Edge, bool]:
    """Determining edge set of the spanning clusters of the shell region.

    A cluster of the revealed region x+Q_outer is spanning when it meets
    both the boundary of x+Q_outer and the boundary of x+Q_inner; the
    cluster of x counts as spanning regardless.  The determining set is all
    open edges between two vertices of a spanning cluster plus all closed
    in-region edges incident to one.
    """
    labels = _component_partition(spec, config, x, outer_r, guard=guard)
    rel = {pt: tuple(c - xc for c, xc in zip(pt, x)) for pt in labels}
    outer_labs = {
        labels[pt]
        for pt in labels
        if max(abs(c) for c in rel[pt]) > outer_r - spec.reach
    }
    inner_labs = {
        labels[pt]
        for pt in labels
        if boundary_membership(spec, inner_r, rel[pt])
    }
    spanning = (outer_labs & inner_labs) | {labels[x]}

    offsets = neighbor_offsets(spec.dimension, spec.reach)
    frozen: dict[Edge, bool] = {}
    for pt, lab in labels.items():
        for off in offsets:
            nbr = translate(pt, off)
            if nbr <= pt or nbr not in labels:
                continue
            e = canonical_edge(pt, nbr)
            if field_state(config, e):
                if lab in spanning and labels[nbr] == lab:
                    frozen[e] = True
            else:
                if lab in spanning or labels[nbr] in spanning:
                    frozen[e] = False
    return frozen


def estimate_local_badness(
    spec: LatticeSpec,
    config: FieldConfig,
    x: Point,
    s: int,
    resamples: int,
    inner_exponent: float = 2.0,
    outer_exponent: float = 4.0,
    radius_cap: int = 64,
    region_guard: int = DEFAULT_REGION_GUARD,
    inner_radius: int | None = None,
    outer_radius: int | None = None,
) -> float:
    """Conditional frequency of the local regularity event failing.

    Freezes the determining edges of the spanning clusters between
    x+Q_inner and x+Q_outer, resamples every other edge with fresh
    sub-seeds, and returns the frequency of NOT t_s_loc(x); the comparison
    scale is exp(-log^2 s).  The asymptotic shell exponents (s^{2d} and
    s^{4d^2}) are astronomically large at desk scale, so they are
    configurable and capped at ``radius_cap``.
    """
    if resamples < 1:
        raise UsageError("resamples must be >= 1")
    if s < 2:
        raise UsageError("estimate_local_badness requires s >= 2")
    inner_r = (
        inner_radius
        if inner_radius is not None
        else min(max(int(s**inner_exponent), s + 1), radius_cap)
    )
    outer_r = (
        outer_radius
        if outer_radius is not None
        else min(max(int(s**outer_exponent), inner_r + 1), max(radius_cap, inner_r + 1))
    )
    if not s < inner_r < outer_r:
        raise UsageError("need s < inner_radius < outer_radius")
    if (2 * outer_r + 1) ** spec.dimension > region_guard:
        raise ResourceError(
            f"region Q_{outer_r} in d={spec.dimension} exceeds the memory guard"
        )
    frozen = spanning_determined_edges(
        spec, config, x, inner_r, outer_r, guard=region_guard
    )
    failures = 0
    for k in range(resamples):
        sub = FieldConfig(resample_seed(config.seed, k), config.p, config.sample_index)
        view = FrozenFieldView(sub, frozen)
        _, _, t_loc = _t_loc_parts(spec, view, x, s, inner_r, region_guard)
        if not t_loc:
            failures += 1
    return failures / resamples


def box_anchor(pt: Point, shift: Point, pitch: int) -> Point:
    """Anchor of the grid box containing pt (boxes tile Z^d exactly)."""
    half = (pitch - 1) // 2
    return tuple(w + pitch * ((c - w + half) // pitch) for c, w in zip(pt, shift))


def box_exploration(
    spec: LatticeSpec,
    config,
    j: int,
    box_scale: int,
    shift: Point,
) -> ExplorationTrace:
    """The box-by-box exploration of the cluster of 0 inside Q_j.

    The grid consists of boxes Q_{2s'}+v clipped to Q_j, with anchors v on
    the lattice (4s'+1)Z^d + shift (an exact tiling of Z^d).  Initially
    every box not meeting the boundary of Q_j counts as explored; a box
    becomes active when an open edge crosses into it from the revealed
    cluster of 0 (the box holding 0 starts active if unexplored).  Each
    step explores the lexicographically least active box and records
    whether the cluster reaches the boundary of Q_j inside it.  At
    termination the revealed cluster equals C(0; Q_j) exactly, which the
    tests pin against direct restricted growth.
    """
    d = spec.dimension
    if len(shift) != d:
        raise UsageError("shift dimension does not match spec")
    if box_scale < 1:
        raise UsageError("box_scale must be >= 1")
    if j < 1:
        raise UsageError("j must be >= 1")
    s4 = 2 * box_scale
    pitch = 4 * box_scale + 1
    o = origin(d)

    anchor_ranges = []
    for i in range(d):
        lo = shift[i] + pitch * math.ceil((-j - s4 - shift[i]) / pitch)
        hi = shift[i] + pitch * math.floor((j + s4 - shift[i]) / pitch)
        anchor_ranges.append(range(lo, hi + 1, pitch))
    grid = set(itertools.product(*anchor_ranges))

    def meets_boundary(v: Point) -> bool:
        m = 0
        for i in range(d):
            lo = max(v[i] - s4, -j)
            hi = min(v[i] + s4, j)
            m = max(m, abs(lo), abs(hi))
        return m > j - spec.reach

    explored = {v for v in grid if not meets_boundary(v)}

    def in_explored(pt: Point) -> bool:
        return box_anchor(pt, shift, pitch) in explored

    offsets = neighbor_offsets(d, spec.reach)
    region = Box(j)

    def reveal() -> tuple[set[Point], set[Point]]:
        """(cluster of 0 inside the explored boxes, anchors activated by
        open crossing edges)."""
        cluster: set[Point] = set()
        pending: set[Point] = set()
        if not in_explored(o):
            pending.add(box_anchor(o, shift, pitch))
            return cluster, pending
        cluster.add(o)
        queue = deque([o])
        while queue:
            cur = queue.popleft()
            for off in offsets:
                nbr = translate(cur, off)
                if nbr in cluster or not region.contains(nbr):
                    continue
                if not field_state(config, canonical_edge(cur, nbr)):
                    continue
                if in_explored(nbr):
                    cluster.add(nbr)
                    queue.append(nbr)
                else:
                    pending.add(box_anchor(nbr, shift, pitch))
        return cluster, pending

    cluster, pending = reveal()
    active = set(pending) - explored
    steps: list[ExplorationStep] = []
    shell = j - spec.reach
    while active:
        chosen = min(active)
        active.discard(chosen)
        explored.add(chosen)
        cluster, pending = reveal()
        touched = any(
            max(abs(c) for c in pt) > shell
            and box_anchor(pt, shift, pitch) == chosen
            for pt in cluster
        )
        newly = sorted((pending - explored) - active)
        active.update(newly)
        steps.append(
            ExplorationStep(
                box_anchor=chosen,
                newly_activated=tuple(newly),
                boundary_touch=touched,
            )
        )
    boundary_hits = {pt for pt in cluster if max(abs(c) for c in pt) > shell}
    return ExplorationTrace(
        shift=shift,
        box_scale=box_scale,
        j=j,
        steps=steps,
        explored=explored,
        tau=len(steps),
        boundary_hits=boundary_hits,
    )
