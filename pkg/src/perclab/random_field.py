"""Deterministic lazy percolation configuration.

Every edge's state is a pure function of (seed, sample_index, edge, p), so
clusters can be explored in any order without materializing the lattice,
replicas are independent streams under one master seed, and raising p never
closes an open edge (monotone coupling).

The uniform deviate for an edge is produced by a counter-based keyed hash:
a SplitMix64-style chain absorbing, in order, a domain tag, the seed, the
sample index, and the edge encoding.  The edge encoding is the word sequence

    [d, a_1, ..., a_d, b_1, ..., b_d]

with (a, b) the canonical (lexicographically ordered) endpoints and each
signed coordinate mapped to its two's-complement 64-bit value.  The 64-bit
hash h is mapped to [0, 1) as (h >> 11) * 2^-53.  The algorithm is pinned
by golden vectors shipped in perclab/data/golden_uniforms.csv; a conforming
implementation must reproduce them bit-for-bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError
from .lattice import Edge

_MASK = (1 << 64) - 1
_PHI = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
# Domain tag separating the edge-state stream from any derived streams.
DOMAIN_EDGE = 0x7065726365646765  # ascii "percedge"
# Domain tag for deriving conditional-resampling sub-seeds.
DOMAIN_RESAMPLE = 0x70657263636F6E64  # ascii "perccond"


@dataclass(frozen=True)
class FieldConfig:
    """A percolation configuration: (seed, sample_index) pick the replica,
    p is the edge retention probability."""

    seed: int
    p: float
    sample_index: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise UsageError(f"p must be in [0, 1], got {self.p}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if not 0 <= self.sample_index < 2**64:
            raise UsageError("sample_index must be an unsigned 64-bit integer")

    def with_p(self, p: float) -> "FieldConfig":
        return FieldConfig(self.seed, p, self.sample_index)

    def replica(self, sample_index: int) -> "FieldConfig":
        return FieldConfig(self.seed, self.p, sample_index)


def mix64(x: int) -> int:
    """SplitMix64 finalizer applied to x + phi; the chain's compression step."""
    z = (x + _PHI) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def hash_words(seed: int, sample_index: int, words: Iterable[int]) -> int:
    """Chain-absorb 64-bit words under (seed, sample_index); returns u64."""
    state = mix64(DOMAIN_EDGE)
    state = mix64(state ^ (seed & _MASK))
    state = mix64(state ^ (sample_index & _MASK))
    for w in words:
        state = mix64(state ^ (w & _MASK))
    return state


def u64_to_unit(h: int) -> float:
    """Map a 64-bit hash to a double in [0, 1) using the top 53 bits."""
    return (h >> 11) * 2.0**-53


def edge_words(e: Edge) -> list[int]:
    """The pinned edge encoding: [d, a coords, b coords] as u64 words."""
    d = len(e.a)
    return [d] + [int(c) & _MASK for c in e.a] + [int(c) & _MASK for c in e.b]


def edge_encoding_bytes(e: Edge) -> bytes:
    """Edge encoding as little-endian bytes (for the golden-vector CSV)."""
    return b"".join(w.to_bytes(8, "little") for w in edge_words(e))


def _require_canonical(e: Edge) -> None:
    if len(e.a) != len(e.b):
        raise UsageError(f"edge endpoints of unequal dimension: {e}")
    if not e.a < e.b:
        raise UsageError(f"edge is not canonical: {e}")


def edge_uniform(config: FieldConfig, e: Edge) -> float:
    """The edge's uniform deviate in [0, 1); independent of p."""
    _require_canonical(e)
    return u64_to_unit(hash_words(config.seed, config.sample_index, edge_words(e)))


def edge_open(config: FieldConfig, e: Edge) -> bool:
    """True iff the edge is open: edge_uniform(e) < p."""
    return edge_uniform(config, e) < config.p


def field_state(config, e: Edge) -> bool:
    """Edge state under a FieldConfig or any view exposing ``state(e)``
    (used by conditional resampling with frozen edges)."""
    state_fn = getattr(config, "state", None)
    if state_fn is not None:
        return state_fn(e)
    return edge_open(config, e)


def resample_seed(seed: int, resample_index: int) -> int:
    """Sub-seed for the k-th conditional resample of a frozen configuration."""
    state = mix64(DOMAIN_RESAMPLE)
    state = mix64(state ^ (seed & _MASK))
    return mix64(state ^ (resample_index & _MASK))


# -- vectorized variant (for uniformity tests and bulk checks) --------------


def _vec_mix64(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_PHI)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def edge_uniforms_vec(
    seed: int, sample_index: int, words: np.ndarray
) -> np.ndarray:
    """Uniforms for many edges at once; words is (n, k) uint64 rows, one
    encoded edge per row.  Bit-identical to edge_uniform row by row."""
    if words.ndim != 2:
        raise UsageError("words must be a 2-d array of u64 edge encodings")
    w = words.astype(np.uint64, copy=False)
    st = np.full(w.shape[0], mix64(DOMAIN_EDGE), dtype=np.uint64)
    st = _vec_mix64(st ^ np.uint64(seed & _MASK))
    st = _vec_mix64(st ^ np.uint64(sample_index & _MASK))
    for col in range(w.shape[1]):
        st = _vec_mix64(st ^ w[:, col])
    return (st >> np.uint64(11)).astype(np.float64) * 2.0**-53


def points_to_words(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Encode endpoint arrays (n, d) into (n, 2d+1) u64 word rows; the caller
    guarantees rows are canonically ordered."""
    n, d = a.shape
    out = np.empty((n, 2 * d + 1), dtype=np.uint64)
    out[:, 0] = d
    out[:, 1 : d + 1] = a.astype(np.int64).view(np.uint64).reshape(n, d)
    out[:, d + 1 :] = b.astype(np.int64).view(np.uint64).reshape(n, d)
    return out


# -- golden vectors ----------------------------------------------------------

GOLDEN_COLUMNS = ("seed", "sample_index", "edge_encoding_hex", "u_as_hex_double")


def golden_rows(cases: Sequence[tuple[int, int, Edge]]) -> list[dict[str, str]]:
    rows = []
    for seed, sample_index, e in cases:
        u = edge_uniform(FieldConfig(seed, 0.5, sample_index), e)
        rows.append(
            {
                "seed": str(seed),
                "sample_index": str(sample_index),
                "edge_encoding_hex": edge_encoding_bytes(e).hex(),
                "u_as_hex_double": u.hex(),
            }
        )
    return rows


def write_golden_csv(path: str, cases: Sequence[tuple[int, int, Edge]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=GOLDEN_COLUMNS)
        writer.writeheader()
        writer.writerows(golden_rows(cases))


def check_golden_csv(path: str) -> int:
    """Re-derive every golden row from its encoding; returns the row count.

    Raises AssertionError on any mismatch.
    """
    n = 0
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            raw = bytes.fromhex(row["edge_encoding_hex"])
            words = [
                int.from_bytes(raw[i : i + 8], "little") for i in range(0, len(raw), 8)
            ]
            h = hash_words(int(row["seed"]), int(row["sample_index"]), words)
            u = u64_to_unit(h)
            if u.hex() != row["u_as_hex_double"]:
                raise AssertionError(
                    f"golden vector mismatch: got {u.hex()}, "
                    f"expected {row['u_as_hex_double']}"
                )
            n += 1
    return n


def default_golden_path() -> str:
    from importlib.resources import files

    return str(files("perclab").joinpath("data/golden_uniforms.csv"))
