"""Numba kernels for lazy cluster growth at sampling scale.

These loops power the Monte Carlo estimators; the pure-Python explorer in
:mod:`perclab.explorer` is the readable reference they are tested against.
Both sides query the same stateless edge hash, so any exploration order
yields the identical cluster for a given (seed, sample_index, p).

Coordinates are packed into a single int64 key (63 // d bits per signed
coordinate), which bounds the usable envelope radius per dimension; the
wrappers in :mod:`perclab.estimators` check the bound and fall back to the
pure-Python path when it cannot hold.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

# Hash constants; must match perclab.random_field exactly.
U_PHI = np.uint64(0x9E3779B97F4A7C15)
U_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U_MIX2 = np.uint64(0x94D049BB133111EB)
U_DOMAIN = np.uint64(0x7065726365646765)
U30 = np.uint64(30)
U27 = np.uint64(27)
U31 = np.uint64(31)
U11 = np.uint64(11)
INV53 = 2.0**-53

# _grow flag bits.
F_BUDGET = 1
F_SHELL = 2
F_FOUND = 4
F_EXHAUSTED = 8

NO_TARGET_KEY = np.int64(-1)


@njit(cache=True, inline="always")
def _mix(x):
    z = x + U_PHI
    z = (z ^ (z >> U30)) * U_MIX1
    z = (z ^ (z >> U27)) * U_MIX2
    return z ^ (z >> U31)


@njit(cache=True, inline="always")
def _stream_state(seed, sample_index):
    st = _mix(U_DOMAIN)
    st = _mix(st ^ seed)
    return _mix(st ^ sample_index)


@njit(cache=True, inline="always")
def _edge_uniform(state0, ca, cb, d):
    # Canonical (lexicographic) endpoint order decides the word order.
    swap = False
    for i in range(d):
        if ca[i] != cb[i]:
            swap = ca[i] > cb[i]
            break
    st = _mix(state0 ^ np.uint64(d))
    if swap:
        for i in range(d):
            st = _mix(st ^ np.uint64(cb[i]))
        for i in range(d):
            st = _mix(st ^ np.uint64(ca[i]))
    else:
        for i in range(d):
            st = _mix(st ^ np.uint64(ca[i]))
        for i in range(d):
            st = _mix(st ^ np.uint64(cb[i]))
    return np.float64(st >> U11) * INV53


@njit(cache=True, inline="always")
def _pack(c, d, bits, half):
    key = np.int64(0)
    for i in range(d):
        key |= np.int64(c[i] + half) << np.int64(bits * i)
    return key


@njit(cache=True, inline="always")
def _find_slot(keys, stamp, gen, mask, key):
    h = np.int64(_mix(np.uint64(key)) & np.uint64(mask))
    while True:
        if stamp[h] != gen:
            return h, False
        if keys[h] == key:
            return h, True
        h = (h + 1) & mask


@njit(cache=True)
def _grow(
    state0,
    p,
    offsets,
    ox,
    bits,
    half,
    region_r,
    target_r,
    annulus_lo,
    annulus_hi,
    inner_r,
    reach,
    max_vertices,
    stop_size,
    early_exit_boundary,
    target_key,
    keys,
    stamp,
    gen,
    queue,
):
    """Breadth-first growth of the open cluster of ``ox`` inside the
    origin-centered box Q_region_r.

    Returns (size, boundary_count, annulus_count, inner_count, flags):
      boundary_count  distinct members in the boundary shell of Q_target_r
      annulus_count   distinct members with annulus_lo < ||z||inf <= annulus_hi
      inner_count     distinct members with ||z||inf <= inner_r
      flags           F_BUDGET | F_SHELL | F_FOUND | F_EXHAUSTED
    ``target_key`` (packed) triggers F_FOUND and an early stop; pass
    NO_TARGET_KEY to disable.  Counter radii of -1 disable the counter.
    """
    d = offsets.shape[1]
    n_off = offsets.shape[0]
    mask = keys.shape[0] - 1
    target_shell = target_r - reach
    region_shell = region_r - reach
    flags = 0
    x_count = 0
    a_count = 0
    i_count = 0

    # Insert the origin.
    okey = _pack(ox, d, bits, half)
    slot, found = _find_slot(keys, stamp, gen, mask, okey)
    keys[slot] = okey
    stamp[slot] = gen
    for i in range(d):
        queue[0, i] = ox[i]
    size = 1
    oinf = 0
    for i in range(d):
        if abs(ox[i]) > oinf:
            oinf = abs(ox[i])
    if target_r >= 0 and oinf > target_shell:
        x_count += 1
        if early_exit_boundary:
            return size, x_count, a_count, i_count, flags
    if annulus_lo >= 0 and oinf > annulus_lo and oinf <= annulus_hi:
        a_count += 1
    if inner_r >= 0 and oinf <= inner_r:
        i_count += 1
    if oinf > region_shell:
        flags |= F_SHELL
    if okey == target_key:
        flags |= F_FOUND
        return size, x_count, a_count, i_count, flags

    z = np.empty(d, dtype=np.int64)
    head = 0
    stopped = False
    while head < size and not stopped:
        for k in range(n_off):
            zinf = 0
            for i in range(d):
                z[i] = queue[head, i] + offsets[k, i]
                if abs(z[i]) > zinf:
                    zinf = abs(z[i])
            if zinf > region_r:
                continue
            key = _pack(z, d, bits, half)
            slot, found = _find_slot(keys, stamp, gen, mask, key)
            if found:
                continue
            if _edge_uniform(state0, queue[head], z, d) >= p:
                continue
            if size >= max_vertices:
                flags |= F_BUDGET
                stopped = True
                break
            keys[slot] = key
            stamp[slot] = gen
            for i in range(d):
                queue[size, i] = z[i]
            size += 1
            if target_r >= 0 and zinf > target_shell:
                x_count += 1
                if early_exit_boundary:
                    stopped = True
                    break
            if annulus_lo >= 0 and zinf > annulus_lo and zinf <= annulus_hi:
                a_count += 1
            if inner_r >= 0 and zinf <= inner_r:
                i_count += 1
            if zinf > region_shell:
                flags |= F_SHELL
            if key == target_key:
                flags |= F_FOUND
                stopped = True
                break
            if stop_size > 0 and size >= stop_size:
                stopped = True
                break
        head += 1
    if not stopped and head >= size:
        flags |= F_EXHAUSTED
    return size, x_count, a_count, i_count, flags


@njit(cache=True, inline="always")
def _chunk_bounds(n, n_chunks, ci):
    chunk = (n + n_chunks - 1) // n_chunks
    lo = ci * chunk
    hi = min(n, lo + chunk)
    return lo, hi


@njit(cache=True, parallel=True)
def batch_one_arm(
    seed, i0, n, p, offsets, bits, half, r, reach, max_vertices, tsize, qcap, n_chunks, out
):
    """out[i]: 1 reached, 0 not reached, 2 indeterminate (budget)."""
    d = offsets.shape[1]
    ox = np.zeros(d, dtype=np.int64)
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            gen += 1
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            size, xc, ac, ic, flags = _grow(
                state0, p, offsets, ox, bits, half,
                r, r, -1, -1, -1, reach,
                max_vertices, 0, True, NO_TARGET_KEY,
                keys, stamp, gen, queue,
            )
            if xc >= 1:
                out[i] = 1
            elif flags & F_EXHAUSTED:
                out[i] = 0
            else:
                out[i] = 2


@njit(cache=True, parallel=True)
def batch_census(
    seed, i0, n, p, offsets, bits, half, j, L, buf, reach,
    max_vertices, tsize, qcap, n_chunks, out_x, out_a, out_flags
):
    """Two-phase census: X_j from growth confined to Q_j, then A_j from a
    fresh growth confined to Q_{j+L+buf} counting the annulus (j, j+L].

    out_flags bits: 1 phase-1 budget, 2 phase-2 budget, 4 phase-2 envelope
    shell touched.
    """
    d = offsets.shape[1]
    ox = np.zeros(d, dtype=np.int64)
    env = j + L + buf
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            gen += 1
            size, xc, ac, ic, flags = _grow(
                state0, p, offsets, ox, bits, half,
                j, j, -1, -1, -1, reach,
                max_vertices, 0, False, NO_TARGET_KEY,
                keys, stamp, gen, queue,
            )
            out_x[i] = xc
            f = 0
            if flags & F_BUDGET:
                f |= 1
            if L > 0:
                gen += 1
                size2, xc2, ac2, ic2, flags2 = _grow(
                    state0, p, offsets, ox, bits, half,
                    env, -1, j, j + L, -1, reach,
                    max_vertices, 0, False, NO_TARGET_KEY,
                    keys, stamp, gen, queue,
                )
                out_a[i] = ac2
                if flags2 & F_BUDGET:
                    f |= 2
                if flags2 & F_SHELL:
                    f |= 4
            else:
                out_a[i] = 0
            out_flags[i] = f


@njit(cache=True, parallel=True)
def batch_cluster_size(
    seed, i0, n, p, offsets, bits, half, env_r, reach,
    max_vertices, stop_size, tsize, qcap, n_chunks, out_size, out_complete
):
    """Cluster volume, grown inside Q_env_r, stopping once ``stop_size`` is
    hit.  out_complete[i] is 1 iff the cluster was fully enumerated (queue
    drained, no budget stop, envelope shell untouched)."""
    d = offsets.shape[1]
    ox = np.zeros(d, dtype=np.int64)
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            gen += 1
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            size, xc, ac, ic, flags = _grow(
                state0, p, offsets, ox, bits, half,
                env_r, -1, -1, -1, -1, reach,
                max_vertices, stop_size, False, NO_TARGET_KEY,
                keys, stamp, gen, queue,
            )
            out_size[i] = size
            complete = (
                (flags & F_EXHAUSTED) != 0
                and (flags & F_BUDGET) == 0
                and (flags & F_SHELL) == 0
            )
            out_complete[i] = 1 if complete else 0


@njit(cache=True, parallel=True)
def batch_restricted_mass(
    seed, i0, n, p, offsets, bits, half, r, env_r, reach,
    max_vertices, tsize, qcap, n_chunks, out_mass, out_flags
):
    """|C(0; Q_env_r) cap Q_r| per sample.

    out_flags bits: 1 budget stop (the count is then a lower bound),
    2 envelope shell touched (the unrestricted cluster continues outside).
    """
    d = offsets.shape[1]
    ox = np.zeros(d, dtype=np.int64)
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            gen += 1
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            size, xc, ac, ic, flags = _grow(
                state0, p, offsets, ox, bits, half,
                env_r, -1, -1, -1, r, reach,
                max_vertices, 0, False, NO_TARGET_KEY,
                keys, stamp, gen, queue,
            )
            out_mass[i] = ic
            f = 0
            if flags & F_BUDGET:
                f |= 1
            if flags & F_SHELL:
                f |= 2
            out_flags[i] = f


@njit(cache=True, parallel=True)
def batch_two_point(
    seed, i0, n, p, offsets, bits, half, env_r, reach, target,
    max_vertices, tsize, qcap, n_chunks, out
):
    """out[i]: 1 target reached, 0 cluster exhausted without it,
    2 indeterminate (budget or envelope shell touched first)."""
    d = offsets.shape[1]
    ox = np.zeros(d, dtype=np.int64)
    tkey = _pack(target, d, bits, half)
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            gen += 1
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            size, xc, ac, ic, flags = _grow(
                state0, p, offsets, ox, bits, half,
                env_r, -1, -1, -1, -1, reach,
                max_vertices, 0, False, tkey,
                keys, stamp, gen, queue,
            )
            if flags & F_FOUND:
                out[i] = 1
            elif (
                (flags & F_EXHAUSTED) != 0
                and (flags & F_BUDGET) == 0
                and (flags & F_SHELL) == 0
            ):
                out[i] = 0
            else:
                out[i] = 2


@njit(cache=True, parallel=True)
def batch_multi_arm_candidates(
    seed, i0, n, p, offsets, bits, half, r, reach, sources,
    max_vertices, tsize, qcap, n_chunks, out
):
    """Necessary condition for the disjoint multi-arm event: every source's
    cluster inside Q_r reaches the boundary shell individually.

    out[i]: 1 all sources reached, 0 some source definitely failed,
    2 indeterminate (a budget-truncated source, none definitely failed).
    """
    d = offsets.shape[1]
    n_src = sources.shape[0]
    for ci in prange(n_chunks):
        lo, hi = _chunk_bounds(n, n_chunks, ci)
        if lo >= hi:
            continue
        keys = np.empty(tsize, dtype=np.int64)
        stamp = np.zeros(tsize, dtype=np.int32)
        queue = np.empty((qcap, d), dtype=np.int64)
        gen = 0
        for i in range(lo, hi):
            state0 = _stream_state(np.uint64(seed), np.uint64(i0 + i))
            verdict = 1
            for s in range(n_src):
                gen += 1
                size, xc, ac, ic, flags = _grow(
                    state0, p, offsets, sources[s], bits, half,
                    r, r, -1, -1, -1, reach,
                    max_vertices, 0, True, NO_TARGET_KEY,
                    keys, stamp, gen, queue,
                )
                if xc >= 1:
                    continue
                if flags & F_EXHAUSTED:
                    verdict = 0
                    break
                verdict = 2
            out[i] = verdict


@njit(cache=True)
def record_open_subgraph(
    seed, sample_index, p, offsets, bits, half, r, reach, sources,
    max_vertices, out_u, out_v
):
    """Reveal the union of the sources' clusters inside Q_r and record every
    open in-region edge incident to it, once per unordered pair, as packed
    endpoint keys.

    Returns (n_edges, truncated).  truncated=1 when a growth budget or the
    edge buffer capacity was hit; the recorded subgraph is then a connected
    under-approximation.
    """
    d = offsets.shape[1]
    n_off = offsets.shape[0]
    n_src = sources.shape[0]
    cap = out_u.shape[0]
    tsize = 1
    while tsize < 4 * max_vertices + 16:
        tsize *= 2
    keys = np.empty(tsize, dtype=np.int64)
    stamp = np.zeros(tsize, dtype=np.int32)
    mask = tsize - 1
    gen = 1
    queue = np.empty((max_vertices + 1, d), dtype=np.int64)
    state0 = _stream_state(np.uint64(seed), np.uint64(sample_index))
    n_edges = 0
    truncated = 0
    size = 0
    z = np.empty(d, dtype=np.int64)
    for s in range(n_src):
        skey = _pack(sources[s], d, bits, half)
        slot, found = _find_slot(keys, stamp, gen, mask, skey)
        if found:
            continue
        if size >= max_vertices:
            truncated = 1
            break
        keys[slot] = skey
        stamp[slot] = gen
        for i in range(d):
            queue[size, i] = sources[s][i]
        head = size
        size += 1
        while head < size:
            hkey = _pack(queue[head], d, bits, half)
            for k in range(n_off):
                zinf = 0
                for i in range(d):
                    z[i] = queue[head, i] + offsets[k, i]
                    if abs(z[i]) > zinf:
                        zinf = abs(z[i])
                if zinf > r:
                    continue
                if _edge_uniform(state0, queue[head], z, d) >= p:
                    continue
                key = _pack(z, d, bits, half)
                if hkey < key:
                    if n_edges >= cap:
                        truncated = 1
                        return n_edges, truncated
                    out_u[n_edges] = hkey
                    out_v[n_edges] = key
                    n_edges += 1
                slot, found = _find_slot(keys, stamp, gen, mask, key)
                if found:
                    continue
                if size >= max_vertices:
                    truncated = 1
                    return n_edges, truncated
                keys[slot] = key
                stamp[slot] = gen
                for i in range(d):
                    queue[size, i] = z[i]
                size += 1
            head += 1
    return n_edges, truncated


def table_size_for(capacity: int) -> int:
    """Power-of-two open-addressing table size for ``capacity`` keys."""
    t = 16
    while t < 4 * capacity + 16:
        t *= 2
    return t


def warm_up() -> None:
    """Compile the batch kernels on a trivial instance (cached on disk)."""
    seed = np.uint64(1)
    offsets = np.array([[-1], [1]], dtype=np.int64)
    out8 = np.zeros(1, dtype=np.uint8)
    outx = np.zeros(1, dtype=np.int64)
    outa = np.zeros(1, dtype=np.int64)
    outf = np.zeros(1, dtype=np.uint8)
    batch_one_arm(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 2, 1, 64, 256, 65, 1, out8)
    batch_census(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 2, 1, 1, 1, 64, 256, 65, 1, outx, outa, outf)
    batch_cluster_size(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 8, 1, 64, 0, 256, 65, 1, outx, out8)
    batch_restricted_mass(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 2, 4, 1, 64, 256, 65, 1, outx, out8)
    target = np.array([2], dtype=np.int64)
    batch_two_point(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 8, 1, target, 64, 256, 65, 1, out8)
    sources = np.array([[0]], dtype=np.int64)
    batch_multi_arm_candidates(seed, 0, 1, 0.5, offsets, 31, 1 << 30, 2, 1, sources, 64, 256, 65, 1, out8)
    eu = np.zeros(8, dtype=np.int64)
    ev = np.zeros(8, dtype=np.int64)
    record_open_subgraph(seed, 0, 0.5, offsets, 31, 1 << 30, 2, 1, sources, 64, eu, ev)
