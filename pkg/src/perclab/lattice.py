"""Lattice geometry: points, edges, boxes, boundaries, and norms.

Two lattice families on Z^d are supported: the nearest-neighbor graph
(edges between points at l1 distance 1) and the spread-out graph with
edges between all pairs at l1 distance at most L.  Nearest-neighbor is
behaviorally identical to spread-out with L=1.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import UsageError

Point = tuple[int, ...]

# Coordinates are plain Python ints but every operation promises
# |coordinate| <= 2^31; beyond that we refuse rather than risk packed-key
# corruption downstream.
COORD_LIMIT = 2**31

# enumerate_box warns (but proceeds) above this many points.
DEFAULT_ENUMERATION_WARN_LIMIT = 10_000_000


@dataclass(frozen=True)
class LatticeSpec:
    """Which graph on Z^d is being percolated.

    ``reach`` is the l1 edge range: 1 for the nearest-neighbor model,
    L >= 1 for the spread-out model.
    """

    dimension: int
    kind: str  # "nn" | "spread_out"
    reach: int = 1

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise UsageError(f"dimension must be >= 1, got {self.dimension}")
        if self.kind not in ("nn", "spread_out"):
            raise UsageError(f"unknown lattice kind {self.kind!r}")
        if self.kind == "nn" and self.reach != 1:
            raise UsageError("nearest-neighbor lattice has reach 1")
        if self.reach < 1:
            raise UsageError(f"reach must be >= 1, got {self.reach}")

    @classmethod
    def nearest_neighbor(cls, dimension: int) -> "LatticeSpec":
        return cls(dimension, "nn", 1)

    @classmethod
    def spread_out(cls, dimension: int, reach: int) -> "LatticeSpec":
        return cls(dimension, "spread_out", reach)

    @property
    def degree(self) -> int:
        return len(neighbor_offsets(self.dimension, self.reach))

    def to_json(self) -> dict:
        model: Union[str, dict] = (
            "nn" if self.kind == "nn" else {"spread_out": self.reach}
        )
        return {"d": self.dimension, "model": model}

    @classmethod
    def from_json(cls, obj: dict) -> "LatticeSpec":
        try:
            d = int(obj["d"])
            model = obj["model"]
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed lattice spec {obj!r}") from exc
        if model == "nn":
            return cls.nearest_neighbor(d)
        if isinstance(model, dict) and "spread_out" in model:
            return cls.spread_out(d, int(model["spread_out"]))
        raise UsageError(f"unknown lattice model {model!r}")


@dataclass(frozen=True)
class Edge:
    """Unordered lattice edge, stored with the lexicographically smaller
    endpoint first."""

    a: Point
    b: Point

    def __post_init__(self) -> None:
        if self.a >= self.b:
            raise UsageError(f"edge endpoints not canonical: {self.a} >= {self.b}")


def canonical_edge(x: Point, y: Point) -> Edge:
    """Order a pair of distinct points canonically; no adjacency check."""
    if len(x) != len(y):
        raise UsageError(f"dimension mismatch: {x} vs {y}")
    if x == y:
        raise UsageError(f"edge endpoints must be distinct, got {x} twice")
    return Edge(x, y) if x < y else Edge(y, x)


def edge_between(spec: LatticeSpec, x: Point, y: Point) -> Edge:
    """Canonical edge between two adjacent points; raises if not adjacent."""
    _check_dim(spec, x)
    _check_dim(spec, y)
    if not are_adjacent(spec, x, y):
        raise UsageError(f"{x} and {y} are not adjacent in {spec}")
    return canonical_edge(x, y)


@dataclass(frozen=True)
class Box:
    """Cube of the given radius, centered at ``center`` (origin if None).

    Contains exactly (2r+1)^d points.
    """

    radius: int
    center: Point | None = None

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise UsageError(f"box radius must be >= 0, got {self.radius}")

    def center_for(self, dimension: int) -> Point:
        if self.center is None:
            return (0,) * dimension
        if len(self.center) != dimension:
            raise UsageError(
                f"box center {self.center} does not match dimension {dimension}"
            )
        return self.center

    def contains(self, pt: Point) -> bool:
        c = self.center_for(len(pt))
        return all(abs(p - q) <= self.radius for p, q in zip(pt, c))

    def point_count(self, dimension: int) -> int:
        return (2 * self.radius + 1) ** dimension


def origin(dimension: int) -> Point:
    return (0,) * dimension


def _check_dim(spec: LatticeSpec, x: Point) -> None:
    if len(x) != spec.dimension:
        raise UsageError(
            f"point {x} has dimension {len(x)}, spec expects {spec.dimension}"
        )
    if any(abs(c) > COORD_LIMIT for c in x):
        raise UsageError(f"coordinate magnitude exceeds 2^31 in {x}")


@lru_cache(maxsize=None)
def neighbor_offsets(dimension: int, reach: int) -> tuple[Point, ...]:
    """Nonzero offsets of l1 norm <= reach, in lexicographic order.

    Enumerates the l1 ball directly (cost proportional to its size), so
    high dimensions stay cheap.
    """
    out: list[Point] = []

    def rec(i: int, remaining: int, prefix: list[int]) -> None:
        if i == dimension:
            if any(prefix):
                out.append(tuple(prefix))
            return
        for c in range(-min(remaining, reach), min(remaining, reach) + 1):
            prefix.append(c)
            rec(i + 1, remaining - abs(c), prefix)
            prefix.pop()

    rec(0, reach, [])
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def neighbor_offsets_array(dimension: int, reach: int) -> np.ndarray:
    """Same offsets as an (k, d) int64 array for the numba kernels."""
    arr = np.array(neighbor_offsets(dimension, reach), dtype=np.int64)
    arr.setflags(write=False)
    return arr


def neighbors(spec: LatticeSpec, x: Point) -> list[Point]:
    """All points adjacent to x, in lexicographic order of the offset."""
    _check_dim(spec, x)
    return [
        tuple(c + o for c, o in zip(x, off))
        for off in neighbor_offsets(spec.dimension, spec.reach)
    ]


def are_adjacent(spec: LatticeSpec, x: Point, y: Point) -> bool:
    if len(x) != len(y):
        raise UsageError(f"dimension mismatch: {x} vs {y}")
    dist = sum(abs(p - q) for p, q in zip(x, y))
    return 0 < dist <= spec.reach


def norms(x: Point, y: Point) -> tuple[float, int, int]:
    """(euclidean, linf, l1) norms of x - y."""
    if len(x) != len(y):
        raise UsageError(f"dimension mismatch: {x} vs {y}")
    diffs = [p - q for p, q in zip(x, y)]
    return (
        math.sqrt(sum(dd * dd for dd in diffs)),
        max((abs(dd) for dd in diffs), default=0),
        sum(abs(dd) for dd in diffs),
    )


def boundary_membership(spec: LatticeSpec, r: int, z: Point) -> bool:
    """True iff z is in Q_r and some neighbor of z lies outside Q_r.

    Computed from the neighbor rule, so spread-out boundaries come out as
    shells of thickness up to the edge reach.
    """
    _check_dim(spec, z)
    if r < 0:
        raise UsageError(f"radius must be >= 0, got {r}")
    if any(abs(c) > r for c in z):
        return False
    return any(
        any(abs(c + o) > r for c, o in zip(z, off))
        for off in neighbor_offsets(spec.dimension, spec.reach)
    )


def boundary_shell_start(r: int, reach: int) -> int:
    """Smallest linf norm of a boundary point of Q_r for an l1-ball edge rule.

    For these edge sets, z in Q_r has a neighbor outside Q_r exactly when
    ||z||_inf > r - reach; the kernels use this closed form and the tests
    pin it against boundary_membership.
    """
    return max(r - reach + 1, 0 if r == 0 else -r)


def enumerate_box(
    spec: LatticeSpec,
    r: int,
    predicate: Union[str, tuple] = "all",
    warn_limit: int = DEFAULT_ENUMERATION_WARN_LIMIT,
) -> Iterator[Point]:
    """Iterate points of Q_r in lexicographic order.

    predicate: "all", "boundary", or ("annulus", inner) which yields
    Q_r \\ Q_inner.  Emits a cost warning above ``warn_limit`` points.
    """
    if r < 0:
        raise UsageError(f"radius must be >= 0, got {r}")
    total = (2 * r + 1) ** spec.dimension
    if total > warn_limit:
        warnings.warn(
            f"enumerating {total} points of Q_{r} in d={spec.dimension}",
            RuntimeWarning,
            stacklevel=2,
        )
    inner: int | None = None
    if isinstance(predicate, tuple):
        if len(predicate) != 2 or predicate[0] != "annulus":
            raise UsageError(f"unknown predicate {predicate!r}")
        inner = int(predicate[1])
        if inner >= r:
            return
    elif predicate not in ("all", "boundary"):
        raise UsageError(f"unknown predicate {predicate!r}")

    shell = boundary_shell_start(r, spec.reach)
    for pt in itertools.product(range(-r, r + 1), repeat=spec.dimension):
        if predicate == "boundary":
            if max(abs(c) for c in pt) < shell:
                continue
        elif inner is not None:
            if all(abs(c) <= inner for c in pt):
                continue
        yield pt


def boundary_points(spec: LatticeSpec, r: int) -> list[Point]:
    return list(enumerate_box(spec, r, "boundary"))


def boundary_size(spec: LatticeSpec, r: int) -> int:
    """|boundary of Q_r|, from the closed-form shell description."""
    if r == 0:
        return 1
    shell = boundary_shell_start(r, spec.reach)
    full = (2 * r + 1) ** spec.dimension
    interior = max(2 * shell - 1, 0) ** spec.dimension
    return full - interior


def translate(x: Point, t: Point) -> Point:
    return tuple(c + o for c, o in zip(x, t))


def points_in_box(box: Box, dimension: int) -> Iterator[Point]:
    c = box.center_for(dimension)
    r = box.radius
    for off in itertools.product(range(-r, r + 1), repeat=dimension):
        yield tuple(ci + oi for ci, oi in zip(c, off))


def sorted_points(pts: Sequence[Point]) -> list[Point]:
    return sorted(pts)
