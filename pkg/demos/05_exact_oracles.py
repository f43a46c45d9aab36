"""Exact small-graph ground truth: enumeration, BK-Reimer, FKG.

Every probability is an exact sum over all 2^m edge configurations, which
pins the Monte Carlo estimators and the disjointness semantics.
"""

from perclab import EventPredicate, LatticeSpec, lattice_region_graph
from perclab.oracle import (
    exact_disjoint_occurrence,
    exact_probability,
    verify_bk,
    verify_fkg,
)

g = lattice_region_graph(LatticeSpec.nearest_neighbor(2), 1, cap=12)
o = g.index_of((0, 0))
corner = g.index_of((1, 1))
boundary = [i for i, q in enumerate(g.vertices) if max(abs(c) for c in q) == 1]

p = 0.5
ev_corner = EventPredicate.connect(o, corner)
ev_arm = EventPredicate.connect_to_set(o, boundary)
print(f"P(0 <-> (1,1)) on Q_1 at p={p}: {exact_probability(g, p, ev_corner):.6f}")
print(f"P(0 <-> dQ_1)  on Q_1 at p={p}: {exact_probability(g, p, ev_arm):.6f}")

two = exact_disjoint_occurrence(g, p, [ev_arm, ev_arm])
print(f"P(two disjoint arms): {two:.6f}")

lhs, rhs, holds = verify_bk(g, p, ev_arm, ev_corner)
print(f"BK-Reimer: P(A o B) = {lhs:.6f} <= P(A) P(B) = {rhs:.6f}: {holds}")
lhs, rhs, holds = verify_fkg(g, p, ev_arm, ev_corner)
print(f"FKG:       P(A & B) = {lhs:.6f} >= P(A) P(B) = {rhs:.6f}: {holds}")
