"""Monte Carlo estimators with standard errors, truncation accounting,
exponent fitting, and the boundary-sum critical-point estimator.

Sample i always uses sample_index = i under the master seed, so estimates
are reproducible bit-for-bit, independent of worker count, and resumable:
every estimator reduces integer per-sample outcomes, and the reductions are
exact.  Budget-truncated samples are never silently counted; they are
excluded from point estimates and reported as an indeterminate fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ResourceError, UsageError
from .explorer import GrowthBudget, grow_cluster, one_arm_event
from .lattice import (
    Box,
    LatticeSpec,
    Point,
    boundary_size,
    neighbor_offsets_array,
    origin,
)
from .random_field import FieldConfig

N_CHUNKS = 64


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampling plan: n_samples replicas under master_seed, partitioned by
    sample_index across parallel workers."""

    n_samples: int
    master_seed: int
    budget: GrowthBudget
    parallel_workers: int = 1

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise UsageError("n_samples must be >= 1")
        if self.parallel_workers < 1:
            raise UsageError("parallel_workers must be >= 1")


@dataclass(frozen=True)
class PointEstimate:
    """A Monte Carlo estimate; n counts the determinate samples only."""

    value: float
    std_error: float
    n: int
    indeterminate_fraction: float


@dataclass(frozen=True)
class ExponentFit:
    """Weighted log-log least squares over a series of point estimates."""

    slope: float
    intercept: float
    slope_std_error: float
    fit_window: list
    weights: list


@dataclass(frozen=True)
class PcEstimate:
    """Bisection bracket for the boundary-sum criterion S(r, p) >= 1."""

    p_hat: float
    bracket: tuple[float, float]
    criterion_radius: int
    samples_per_probe: int


def _set_threads(cfg: EstimatorConfig) -> None:
    import numba

    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(max(1, min(cfg.parallel_workers, limit)))


def _geometry(spec: LatticeSpec, env_needed: int):
    """(offsets, bits, half) when the packed-key kernels can cover the
    envelope, else None (pure-Python fallback)."""
    bits = 63 // spec.dimension
    half = 1 << (bits - 1)
    if env_needed + spec.reach > half - 1:
        return None
    offsets = np.ascontiguousarray(neighbor_offsets_array(spec.dimension, spec.reach))
    return offsets, bits, half


def _caps(spec: LatticeSpec, region_r: int, budget: GrowthBudget) -> tuple[int, int, int]:
    """(max_vertices, table_size, queue_capacity) for a region of radius
    region_r: the effective cap never exceeds the region volume."""
    volume = (2 * region_r + 1) ** spec.dimension
    mv = min(budget.max_vertices, volume)
    return mv, K.table_size_for(mv), mv + 1


def _bernoulli_estimate(out: np.ndarray) -> PointEstimate:
    n_total = out.shape[0]
    det = out != 2
    n = int(det.sum())
    indet = 1.0 - n / n_total
    if n == 0:
        return PointEstimate(float("nan"), float("nan"), 0, indet)
    k = int((out == 1).sum())
    v = k / n
    se = math.sqrt(v * (1.0 - v) / n)
    return PointEstimate(v, se, n, indet)


def _mean_estimate(values: np.ndarray, det: np.ndarray) -> PointEstimate:
    n_total = values.shape[0]
    n = int(det.sum())
    indet = 1.0 - n / n_total
    if n == 0:
        return PointEstimate(float("nan"), float("nan"), 0, indet)
    sel = values[det].astype(np.float64)
    v = float(sel.mean())
    se = float(sel.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return PointEstimate(v, se, n, indet)


# -- per-sample outcome arrays (integer, mergeable, worker-invariant) ---------


def one_arm_outcomes(
    spec: LatticeSpec,
    p: float,
    r: int,
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    engine: str = "auto",
) -> np.ndarray:
    """uint8 per sample: 1 reached, 0 not, 2 indeterminate."""
    if r < 1:
        raise UsageError("one-arm estimation requires r >= 1")
    n = cfg.n_samples if count is None else count
    geo = _geometry(spec, r) if engine != "python" else None
    out = np.zeros(n, dtype=np.uint8)
    if geo is not None:
        offsets, bits, half = geo
        mv, tsize, qcap = _caps(spec, r, cfg.budget)
        _set_threads(cfg)
        K.batch_one_arm(
            np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
            r, spec.reach, mv, tsize, qcap, N_CHUNKS, out,
        )
        return out
    for i in range(n):
        config = FieldConfig(cfg.master_seed, p, start_index + i)
        reached, truncated = one_arm_event(spec, config, r, cfg.budget)
        out[i] = 1 if reached else (2 if truncated else 0)
    return out


def census_outcomes(
    spec: LatticeSpec,
    p: float,
    j: int,
    L: int,
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    annulus_buffer: int | None = None,
    engine: str = "auto",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(X_j, A_j, flags) per sample; flags bits: 1 phase-1 budget,
    2 phase-2 budget, 4 phase-2 envelope shell touched."""
    if j < 1 or L < 0:
        raise UsageError("census estimation requires j >= 1, L >= 0")
    buf = L if annulus_buffer is None else annulus_buffer
    n = cfg.n_samples if count is None else count
    env = j + L + buf
    geo = _geometry(spec, env) if engine != "python" else None
    out_x = np.zeros(n, dtype=np.int64)
    out_a = np.zeros(n, dtype=np.int64)
    out_f = np.zeros(n, dtype=np.uint8)
    if geo is not None:
        offsets, bits, half = geo
        mv, tsize, qcap = _caps(spec, env, cfg.budget)
        _set_threads(cfg)
        K.batch_census(
            np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
            j, L, buf, spec.reach, mv, tsize, qcap, N_CHUNKS, out_x, out_a, out_f,
        )
        return out_x, out_a, out_f
    o = origin(spec.dimension)
    for i in range(n):
        config = FieldConfig(cfg.master_seed, p, start_index + i)
        phase1 = grow_cluster(spec, config, o, Box(j), cfg.budget, boundary_radius=j)
        out_x[i] = len(phase1.boundary_hits)
        f = 1 if phase1.truncated else 0
        if L > 0:
            phase2 = grow_cluster(spec, config, o, Box(env), cfg.budget)
            out_a[i] = sum(
                1 for y in phase2.members if j < max(abs(c) for c in y) <= j + L
            )
            if phase2.truncated:
                f |= 2
            if any(
                max(abs(c) for c in y) > env - spec.reach for y in phase2.members
            ):
                f |= 4
        out_f[i] = f
    return out_x, out_a, out_f


def cluster_size_outcomes(
    spec: LatticeSpec,
    p: float,
    stop_size: int,
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    env_radius: int | None = None,
    engine: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """(size, complete) per sample; growth stops once size reaches
    stop_size.  complete=1 means the cluster was fully enumerated inside
    the envelope without touching its boundary shell."""
    n = cfg.n_samples if count is None else count
    env = env_radius if env_radius is not None else max(64, 4 * math.isqrt(stop_size))
    bits = 63 // spec.dimension
    env = min(env, (1 << (bits - 1)) - 1 - spec.reach)
    geo = _geometry(spec, env) if engine != "python" else None
    out_size = np.zeros(n, dtype=np.int64)
    out_complete = np.zeros(n, dtype=np.uint8)
    if geo is not None:
        offsets, bits, half = geo
        mv, tsize, qcap = _caps(spec, env, cfg.budget)
        _set_threads(cfg)
        K.batch_cluster_size(
            np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
            env, spec.reach, mv, stop_size, tsize, qcap, N_CHUNKS,
            out_size, out_complete,
        )
        return out_size, out_complete
    o = origin(spec.dimension)
    budget = GrowthBudget(max_vertices=min(cfg.budget.max_vertices, stop_size))
    for i in range(n):
        config = FieldConfig(cfg.master_seed, p, start_index + i)
        cl = grow_cluster(spec, config, o, Box(env), budget)
        shell = any(
            max(abs(c) for c in y) > env - spec.reach for y in cl.members
        )
        out_size[i] = cl.size
        out_complete[i] = 0 if (cl.truncated or shell) else 1
    return out_size, out_complete


def two_point_outcomes(
    spec: LatticeSpec,
    p: float,
    x: Point,
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    env_radius: int | None = None,
    engine: str = "auto",
) -> np.ndarray:
    """uint8 per sample: 1 connected, 0 not, 2 indeterminate."""
    if all(c == 0 for c in x):
        raise UsageError("two-point estimation requires x != 0")
    n = cfg.n_samples if count is None else count
    linf = max(abs(c) for c in x)
    env = env_radius if env_radius is not None else 5 * linf + 10
    geo = _geometry(spec, env) if engine != "python" else None
    out = np.zeros(n, dtype=np.uint8)
    if geo is not None:
        offsets, bits, half = geo
        mv, tsize, qcap = _caps(spec, env, cfg.budget)
        target = np.array(x, dtype=np.int64)
        _set_threads(cfg)
        K.batch_two_point(
            np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
            env, spec.reach, target, mv, tsize, qcap, N_CHUNKS, out,
        )
        return out
    o = origin(spec.dimension)
    for i in range(n):
        config = FieldConfig(cfg.master_seed, p, start_index + i)
        cl = grow_cluster(spec, config, o, Box(env), cfg.budget)
        if x in cl.members:
            out[i] = 1
        else:
            shell = any(
                max(abs(c) for c in y) > env - spec.reach for y in cl.members
            )
            out[i] = 2 if (cl.truncated or shell) else 0
    return out


def unpack_keys(keys: np.ndarray, d: int, bits: int, half: int) -> np.ndarray:
    """Inverse of the kernel coordinate packing: (n,) keys -> (n, d) coords."""
    out = np.empty((keys.shape[0], d), dtype=np.int64)
    mask = (1 << bits) - 1
    for i in range(d):
        out[:, i] = ((keys >> (bits * i)) & mask) - half
    return out


def multi_arm_outcomes(
    spec: LatticeSpec,
    p: float,
    r: int,
    points: list[Point],
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    engine: str = "auto",
) -> np.ndarray:
    """uint8 per sample: 1 the disjoint multi-arm event holds, 0 it fails,
    2 indeterminate.

    The kernel pass filters on the necessary condition (every source's
    cluster reaches the boundary); candidate samples are re-grown with edge
    recording and certified by the max-flow witness search.
    """
    from .disjoint_paths import multi_arm_event, max_edge_disjoint, OpenSubgraph
    from .lattice import canonical_edge

    if r < 1:
        raise UsageError("multi-arm estimation requires r >= 1")
    n = cfg.n_samples if count is None else count
    for y in points:
        if sum(c * c for c in y) > (r / 2) ** 2:
            raise UsageError(f"point {y} lies outside B(0, r/2)")
    geo = _geometry(spec, r) if engine != "python" else None
    out = np.zeros(n, dtype=np.uint8)
    if geo is None:
        for i in range(n):
            config = FieldConfig(cfg.master_seed, p, start_index + i)
            holds, truncated = multi_arm_event(spec, config, r, list(points), cfg.budget)
            out[i] = 1 if holds else (2 if truncated else 0)
        return out

    offsets, bits, half = geo
    mv, tsize, qcap = _caps(spec, r, cfg.budget)
    sources = np.array(points, dtype=np.int64)
    _set_threads(cfg)
    K.batch_multi_arm_candidates(
        np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
        r, spec.reach, sources, mv, tsize, qcap, N_CHUNKS, out,
    )
    if len(points) == 1:
        # One source: reaching the boundary is the whole event.
        return out

    shell = r - spec.reach
    candidates = np.nonzero(out == 1)[0]
    cap = max(65536, mv * offsets.shape[0] // 2 + 16)
    buf_u = np.empty(cap, dtype=np.int64)
    buf_v = np.empty(cap, dtype=np.int64)
    for i in candidates:
        m, truncated = K.record_open_subgraph(
            np.uint64(cfg.master_seed), start_index + int(i), p, offsets, bits,
            half, r, spec.reach, sources, len(points) * mv, buf_u, buf_v,
        )
        ucoords = unpack_keys(buf_u[:m], spec.dimension, bits, half)
        vcoords = unpack_keys(buf_v[:m], spec.dimension, bits, half)
        vertices = {tuple(int(c) for c in row) for row in ucoords}
        vertices.update(tuple(int(c) for c in row) for row in vcoords)
        vertices.update(points)
        edges = {
            canonical_edge(tuple(int(c) for c in u), tuple(int(c) for c in v))
            for u, v in zip(ucoords, vcoords)
        }
        subgraph = OpenSubgraph(vertices, edges)
        sinks = {v for v in vertices if max(abs(c) for c in v) > shell}
        witness = max_edge_disjoint(subgraph, list(points), sinks, per_source_cap=1)
        if witness.count >= len(points):
            out[i] = 1
        else:
            out[i] = 2 if truncated else 0
    return out


def restricted_mass_outcomes(
    spec: LatticeSpec,
    p: float,
    r: int,
    cfg: EstimatorConfig,
    start_index: int = 0,
    count: int | None = None,
    env_buffer: int | None = None,
    engine: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """(|C(0; Q_env) cap Q_r|, flags) per sample; flag bits: 1 budget stop,
    2 envelope shell touched."""
    n = cfg.n_samples if count is None else count
    buf = env_buffer if env_buffer is not None else max(r, 16)
    env = r + buf
    geo = _geometry(spec, env) if engine != "python" else None
    out_mass = np.zeros(n, dtype=np.int64)
    out_flags = np.zeros(n, dtype=np.uint8)
    if geo is not None:
        offsets, bits, half = geo
        mv, tsize, qcap = _caps(spec, env, cfg.budget)
        _set_threads(cfg)
        K.batch_restricted_mass(
            np.uint64(cfg.master_seed), start_index, n, p, offsets, bits, half,
            r, env, spec.reach, mv, tsize, qcap, N_CHUNKS, out_mass, out_flags,
        )
        return out_mass, out_flags
    o = origin(spec.dimension)
    inner = Box(r)
    for i in range(n):
        config = FieldConfig(cfg.master_seed, p, start_index + i)
        cl = grow_cluster(spec, config, o, Box(env), cfg.budget)
        out_mass[i] = sum(1 for y in cl.members if inner.contains(y))
        f = 1 if cl.truncated else 0
        if any(max(abs(c) for c in y) > env - spec.reach for y in cl.members):
            f |= 2
        out_flags[i] = f
    return out_mass, out_flags


# -- point estimators ----------------------------------------------------------


def estimate_one_arm(
    spec: LatticeSpec, p: float, r: int, cfg: EstimatorConfig
) -> PointEstimate:
    """P(0 <-> boundary of Q_r), the one-arm probability gamma(r)."""
    return _bernoulli_estimate(one_arm_outcomes(spec, p, r, cfg))


def estimate_cluster_tail(
    spec: LatticeSpec,
    p: float,
    thresholds: list[int],
    cfg: EstimatorConfig,
    env_radius: int | None = None,
) -> list[PointEstimate]:
    """P(|C(0)| > n) for each threshold, all evaluated from one growth per
    sample; estimates are monotone nonincreasing in n by construction."""
    if not thresholds or any(
        b <= a for a, b in zip(thresholds, thresholds[1:])
    ):
        raise UsageError("thresholds must be nonempty and strictly ascending")
    if any(t < 0 for t in thresholds):
        raise UsageError("thresholds must be nonnegative")
    if cfg.budget.max_vertices <= thresholds[-1]:
        raise UsageError("budget.max_vertices must exceed the largest threshold")
    stop = thresholds[-1] + 1
    sizes, complete = cluster_size_outcomes(
        spec, p, stop, cfg, env_radius=env_radius
    )
    estimates = []
    for t in thresholds:
        out = np.full(sizes.shape[0], 2, dtype=np.uint8)
        out[sizes > t] = 1
        out[(complete == 1) & (sizes <= t)] = 0
        estimates.append(_bernoulli_estimate(out))
    return estimates


def estimate_two_point(
    spec: LatticeSpec,
    p: float,
    x: Point,
    cfg: EstimatorConfig,
    env_radius: int | None = None,
) -> PointEstimate:
    """P(0 <-> x)."""
    return _bernoulli_estimate(
        two_point_outcomes(spec, p, x, cfg, env_radius=env_radius)
    )


def estimate_multi_arm(
    spec: LatticeSpec,
    p: float,
    r: int,
    points: list[Point],
    cfg: EstimatorConfig,
) -> PointEstimate:
    """P({y_1 <-> dQ_r} o ... o {y_l <-> dQ_r}) with edge-disjoint
    certificates."""
    return _bernoulli_estimate(multi_arm_outcomes(spec, p, r, points, cfg))


def boundary_sum(
    spec: LatticeSpec, p: float, r: int, cfg: EstimatorConfig
) -> PointEstimate:
    """S(r, p) = E[X_r]: the expected number of boundary vertices of Q_r
    connected to 0 inside Q_r."""
    out_x, _, out_f = census_outcomes(spec, p, r, 0, cfg)
    det = (out_f & 1) == 0
    return _mean_estimate(out_x, det)


def estimate_pc(
    spec: LatticeSpec,
    r: int,
    cfg: EstimatorConfig,
    tolerance: float,
    truncation_gate: float = 0.25,
) -> PcEstimate:
    """Locate the threshold of the criterion S(r, p) >= 1 with shared seeds.

    The empirical criterion counts boundary hits per sample (a truncated
    sample contributes its partial count, which never overcounts), so a
    positive decision is sound under the growth budget.  Probing starts
    from small p and climbs in fine geometric steps until the criterion
    first holds, then bisects inside the last step; this keeps every probe
    below or barely above the threshold, where clusters are budget-feasible.
    Whole-bracket bisection from (0, 1) would instead probe deep in the
    supercritical regime, where dense clusters exhaust any affordable
    budget and the criterion is undecidable; a probe whose truncation rate
    exceeds ``truncation_gate`` raises ResourceError rather than guessing.

    Monotone coupling makes the per-sample counts monotone in p wherever
    the budget does not bind, so the refinement is well-posed.  The
    finite-r threshold converges to the critical point only as r grows;
    the systematic finite-r offset is reported through the bracket, never
    corrected.
    """
    if r < 2:
        raise UsageError("estimate_pc requires r >= 2")
    if not 0 < tolerance < 1:
        raise UsageError("tolerance must be in (0, 1)")

    def criterion(p: float) -> bool:
        out_x, _, out_f = census_outcomes(spec, p, r, 0, cfg)
        trunc = float(((out_f & 1) != 0).mean())
        if trunc > truncation_gate:
            raise ResourceError(
                f"boundary-sum criterion undecidable at p={p:.6g}: "
                f"{trunc:.0%} of samples exhausted the growth budget"
            )
        return float(out_x.mean()) >= 1.0

    # ascending scan: fine geometric steps from the tolerance scale
    step = 1.015625  # 1 + 1/64
    lo = 0.0
    p = min(tolerance, 0.5)
    hit = False
    while p < 1.0:
        if criterion(p):
            hit = True
            break
        lo = p
        p = min(p * step, 1.0) if p * step < 1.0 else 1.0
        if p == 1.0:
            break
    if not hit:
        if not criterion(1.0):
            raise UsageError("criterion not bracketed in (0, 1)")
        p = 1.0
    hi = p
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if criterion(mid):
            hi = mid
        else:
            lo = mid
    return PcEstimate(
        p_hat=(lo + hi) / 2,
        bracket=(lo, hi),
        criterion_radius=r,
        samples_per_probe=cfg.n_samples,
    )


def fit_exponent(
    series: list[tuple[float, PointEstimate]],
    min_scale: float = 4.0,
    max_indeterminate: float = 0.01,
) -> ExponentFit:
    """Weighted least squares on (log scale, log value).

    Only estimates with value > 0 and indeterminate fraction below the
    threshold enter; scales below ``min_scale`` are excluded by default
    because finite-size corrections dominate there (the window is reported,
    never silent).  Weights are inverse variances of log value by the delta
    method; exact points (zero standard error) get a large finite weight.
    """
    usable = [
        (s, est)
        for s, est in series
        if est.value > 0
        and est.indeterminate_fraction < max_indeterminate
        and s >= min_scale
        and math.isfinite(est.value)
    ]
    if len(usable) < 3:
        raise UsageError(
            f"fit_exponent needs >= 3 usable points, got {len(usable)}"
        )
    xs = np.array([math.log(s) for s, _ in usable])
    ys = np.array([math.log(est.value) for _, est in usable])
    rel = np.array(
        [max(est.std_error / est.value, 1e-9) for _, est in usable]
    )
    w = 1.0 / rel**2
    sw = w.sum()
    xbar = (w * xs).sum() / sw
    ybar = (w * ys).sum() / sw
    sxx = (w * (xs - xbar) ** 2).sum()
    slope = (w * (xs - xbar) * (ys - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    slope_se = math.sqrt(1.0 / sxx)
    return ExponentFit(
        slope=float(slope),
        intercept=float(intercept),
        slope_std_error=float(slope_se),
        fit_window=[s for s, _ in usable],
        weights=[float(x) for x in w],
    )


def lowmass_statistic(
    spec: LatticeSpec,
    p: float,
    j: int,
    L: int,
    c: float,
    cfg: EstimatorConfig,
    annulus_buffer: int | None = None,
) -> tuple[PointEstimate, PointEstimate]:
    """Paired diagnostic for the low-mass boundary event.

    lhs: frequency of {X_j >= L^2 and A_j <= c L^4};
    rhs: frequency of the one-arm event {X_j >= 1}; same samples.
    No canonical value of the threshold constant c exists, so it is a
    caller-chosen input, typically swept over a grid.
    """
    if j < 1 or L < 1:
        raise UsageError("lowmass_statistic requires j >= 1 and L >= 1")
    if c <= 0:
        raise UsageError("c must be positive")
    out_x, out_a, out_f = census_outcomes(
        spec, p, j, L, cfg, annulus_buffer=annulus_buffer
    )
    x_thr = L * L
    a_thr = c * L**4

    x_trunc = (out_f & 1) != 0
    a_trunc = (out_f & 6) != 0

    # X side: counts only undercount, so >= threshold is always definite.
    x_yes = out_x >= x_thr
    x_no = (~x_yes) & (~x_trunc)
    # A side: counts only undercount, so > threshold is always definite.
    a_no = out_a > a_thr
    a_yes = (~a_no) & (~a_trunc)

    lhs = np.full(out_x.shape[0], 2, dtype=np.uint8)
    lhs[x_no | a_no] = 0
    lhs[x_yes & a_yes] = 1

    rhs = np.full(out_x.shape[0], 2, dtype=np.uint8)
    rhs[out_x >= 1] = 1
    rhs[(out_x < 1) & (~x_trunc)] = 0
    return _bernoulli_estimate(lhs), _bernoulli_estimate(rhs)


def second_moment_check(
    spec: LatticeSpec,
    p: float,
    r: int,
    cfg: EstimatorConfig,
    env_buffer: int | None = None,
) -> PointEstimate:
    """E[|C(0; Q_env) cap Q_r|^2], the envelope-confined double connection
    sum over Q_r; the series across r, normalized by r^6, exposes
    boundedness.  Only budget-truncated samples are indeterminate: the
    envelope confinement is part of the estimand (an explicit, reported
    convention - the unrestricted sum is not computable exactly)."""
    if r < 1:
        raise UsageError("second_moment_check requires r >= 1")
    mass, flags = restricted_mass_outcomes(
        spec, p, r, cfg, env_buffer=env_buffer
    )
    det = (flags & 1) == 0
    return _mean_estimate(mass.astype(np.float64) ** 2, det)


def boundary_sum_reference(spec: LatticeSpec, r: int) -> int:
    """|dQ_r|: the p=1 value of the boundary sum."""
    return boundary_size(spec, r)
