"""Certify disjoint connection events with edge-disjoint path witnesses.

Two arms from neighboring sources to the box boundary occur disjointly
exactly when a unit-capacity max-flow routes one path per source; the
witness paths are recovered and validated explicitly.
"""

from perclab import (
    Box,
    EstimatorConfig,
    FieldConfig,
    GrowthBudget,
    LatticeSpec,
    OpenSubgraph,
    estimate_multi_arm,
    grow_cluster,
    max_edge_disjoint,
)

spec = LatticeSpec.nearest_neighbor(2)
budget = GrowthBudget(max_vertices=10_000)
points = [(-1, 0), (1, 0)]
r = 6

config = FieldConfig(2, 0.55)
clusters = [grow_cluster(spec, config, y, Box(r), budget, boundary_radius=r) for y in points]
sub = OpenSubgraph.from_clusters(clusters)
sinks = set().union(*(c.boundary_hits for c in clusters))
witness = max_edge_disjoint(sub, points, sinks)
print(f"flow certificate found {witness.count} edge-disjoint arms")
for path in witness.paths:
    print(f"  {path[0]} -> ... -> {path[-1]}  ({len(path) - 1} edges)")
witness.validate(sub, sinks)
print("witness validated: open edges only, pairwise edge-disjoint\n")

cfg = EstimatorConfig(n_samples=30_000, master_seed=5, budget=budget)
for rr in (4, 6, 8):
    est = estimate_multi_arm(spec, 0.5, rr, points, cfg)
    print(f"P(two disjoint arms to dQ_{rr}) = {est.value:.5f} +- {est.std_error:.5f}")
