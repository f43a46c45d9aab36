"""Boundary censuses, regularity scans, and the box-by-box exploration.

The census counts X_j (boundary vertices of Q_j reached inside Q_j) and
A_j (annulus vertices reached, confined to a reported envelope); the box
exploration reveals the same cluster one boundary box at a time and lands
on exactly the same boundary set.
"""

from perclab import (
    Box,
    FieldConfig,
    GrowthBudget,
    LatticeSpec,
    box_exploration,
    census,
    grow_cluster,
    regularity_check,
)

spec = LatticeSpec.nearest_neighbor(2)
budget = GrowthBudget(max_vertices=100_000)
config = FieldConfig(21, 0.55)

c = census(spec, config, j=4, L=2, budget=budget)
print(f"census at j=4, L=2: X_4 = {c.x_j}, A_4 = {c.a_j} "
      f"(annulus truncated: {c.a_j_truncated}), one-arm: {c.one_arm}")

rep = regularity_check(spec, config, (0, 0), s=3, envelope_radius=6)
print(f"regularity at s=3: inner component mass {rep.inner_count}, "
      f"{rep.disjoint_crossings} disjoint crossings, "
      f"local event holds: {rep.t_s_loc_holds}")

trace = box_exploration(spec, config, j=6, box_scale=1, shift=(0, 0))
direct = grow_cluster(spec, config, (0, 0), Box(6), budget, boundary_radius=6)
print(f"box exploration: tau = {trace.tau} steps, "
      f"{len(trace.boundary_hits)} boundary vertices reached")
print(f"matches direct restricted growth exactly: "
      f"{trace.boundary_hits == direct.boundary_hits}")
