"""Grow percolation clusters lazily over the stateless random field.

Every edge state is a pure function of (seed, sample_index, edge, p), so a
cluster can be re-grown bit-for-bit at any time, and raising p only ever
adds vertices (monotone coupling).
"""

from perclab import (
    Box,
    FieldConfig,
    GrowthBudget,
    LatticeSpec,
    edge_uniform,
    grow_cluster,
)
from perclab.lattice import canonical_edge

spec = LatticeSpec.nearest_neighbor(2)
budget = GrowthBudget(max_vertices=10_000)

e = canonical_edge((0, 0), (0, 1))
print("the edge (0,0)-(0,1) carries the uniform", edge_uniform(FieldConfig(7, 0.5), e))
print("so it is open exactly when p exceeds that value\n")

for p in (0.3, 0.45, 0.55):
    cluster = grow_cluster(spec, FieldConfig(7, p), (0, 0), Box(10), budget, boundary_radius=10)
    print(
        f"p={p}: |C(0; Q_10)| = {cluster.size:4d}, "
        f"open edges = {len(cluster.open_edges):4d}, "
        f"reaches the boundary: {bool(cluster.boundary_hits)}"
    )

print("\ncoupling: the p=0.3 cluster is contained in the p=0.55 cluster:")
small = grow_cluster(spec, FieldConfig(7, 0.3), (0, 0), Box(10), budget)
big = grow_cluster(spec, FieldConfig(7, 0.55), (0, 0), Box(10), budget)
print("  containment holds:", set(small.members) <= set(big.members))
