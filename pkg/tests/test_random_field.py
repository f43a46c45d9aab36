from __future__ import annotations

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from perclab.errors import UsageError
from perclab.lattice import Edge, canonical_edge
from perclab.random_field import (
    FieldConfig,
    check_golden_csv,
    default_golden_path,
    edge_open,
    edge_uniform,
    edge_uniforms_vec,
    points_to_words,
)


def _axis_edges(n: int, d: int = 2) -> np.ndarray:
    """n distinct canonical edges along the first axis."""
    a = np.zeros((n, d), dtype=np.int64)
    a[:, 0] = np.arange(n)
    a[:, 1:] = (np.arange(n) % 97)[:, None]
    b = a.copy()
    b[:, 0] += 1
    return points_to_words(a, b)


def test_determinism_and_canonical_invariance():
    cfg = FieldConfig(seed=42, p=0.5, sample_index=3)
    e = canonical_edge((2, -1), (1, -1))
    u1 = edge_uniform(cfg, e)
    u2 = edge_uniform(cfg, canonical_edge((1, -1), (2, -1)))
    assert u1 == u2
    assert edge_uniform(cfg, e) == u1
    assert 0.0 <= u1 < 1.0


def _bad_edge():
    e = Edge.__new__(Edge)
    object.__setattr__(e, "a", (1, 0))
    object.__setattr__(e, "b", (0, 0))
    return e


def test_non_canonical_edge_rejected():
    with pytest.raises(UsageError):
        Edge((1, 0), (0, 0))
    with pytest.raises(UsageError):
        edge_uniform(FieldConfig(seed=1, p=0.5), _bad_edge())


def test_p_extremes():
    e = canonical_edge((0, 0), (0, 1))
    for seed in range(20):
        assert not edge_open(FieldConfig(seed, 0.0), e)
        assert edge_open(FieldConfig(seed, 1.0), e)


def test_uniform_independent_of_p():
    e = canonical_edge((3, 4), (3, 5))
    u1 = edge_uniform(FieldConfig(9, 0.1), e)
    u2 = edge_uniform(FieldConfig(9, 0.9), e)
    assert u1 == u2


def test_open_fraction_binomial():
    words = _axis_edges(1_000_000)
    us = edge_uniforms_vec(7, 0, words)
    frac = float((us < 0.3).mean())
    # binomial standard error at n=1e6 is ~0.00046; 0.002 is >4 sigma
    assert abs(frac - 0.3) < 0.002


def test_chi_square_uniformity_golden():
    # recorded once as a golden statistical check: fixed seed, fixed bins
    words = _axis_edges(1_000_000)
    us = edge_uniforms_vec(1234, 0, words)
    counts, _ = np.histogram(us, bins=1000, range=(0.0, 1.0))
    expected = len(us) / 1000
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    threshold = scipy.stats.chi2.ppf(0.999, 999)
    assert chi2 < threshold, (chi2, threshold)


def test_monotone_coupling_exhaustive_random():
    words = _axis_edges(10_000)
    us = edge_uniforms_vec(5, 2, words)
    for p1, p2 in ((0.2, 0.5), (0.5, 0.50001), (0.0, 1.0)):
        open1 = us < p1
        open2 = us < p2
        assert not np.any(open1 & ~open2)


@settings(max_examples=80, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    sidx=st.integers(0, 2**64 - 1),
    c=st.tuples(st.integers(-99, 99), st.integers(-99, 99)),
    p1=st.floats(0.0, 1.0),
    p2=st.floats(0.0, 1.0),
)
def test_monotone_coupling_property(seed, sidx, c, p1, p2):
    lo, hi = min(p1, p2), max(p1, p2)
    e = canonical_edge(c, (c[0] + 1, c[1]))
    if edge_open(FieldConfig(seed, lo, sidx), e):
        assert edge_open(FieldConfig(seed, hi, sidx), e)


def test_replica_independence_correlation():
    words = _axis_edges(100_000)
    a = edge_uniforms_vec(11, 4, words) < 0.5
    b = edge_uniforms_vec(11, 5, words) < 0.5
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 0.01


def test_replica_streams_differ():
    words = _axis_edges(1000)
    a = edge_uniforms_vec(11, 0, words)
    b = edge_uniforms_vec(11, 1, words)
    assert not np.array_equal(a, b)


def test_golden_vectors():
    assert check_golden_csv(default_golden_path()) == 3


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    a = rng.integers(-40, 40, size=(200, 3)).astype(np.int64)
    b = a.copy()
    b[:, 2] += 1
    us = edge_uniforms_vec(99, 7, points_to_words(a, b))
    cfg = FieldConfig(99, 0.5, 7)
    for i in range(0, 200, 17):
        e = canonical_edge(tuple(int(v) for v in a[i]), tuple(int(v) for v in b[i]))
        assert edge_uniform(cfg, e) == us[i]


def test_field_config_validation():
    with pytest.raises(UsageError):
        FieldConfig(seed=1, p=1.5)
    with pytest.raises(UsageError):
        FieldConfig(seed=-1, p=0.5)
    with pytest.raises(UsageError):
        FieldConfig(seed=1, p=0.5, sample_index=2**64)
