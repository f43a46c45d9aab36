"""perclab: a laboratory for critical bond percolation on Z^d.

Lazy cluster exploration over a stateless random field, exact small-graph
oracles, edge-disjoint path certificates, and Monte Carlo estimators for
arm probabilities, cluster tails, two-point functions, and boundary sums.
"""

from .errors import ResourceError, UsageError
from .lattice import (
    Box,
    Edge,
    LatticeSpec,
    boundary_membership,
    boundary_size,
    canonical_edge,
    edge_between,
    enumerate_box,
    neighbors,
    norms,
)
from .random_field import FieldConfig, edge_open, edge_uniform
from .explorer import (
    BoundaryCensus,
    Cluster,
    ExplorationTrace,
    GrowthBudget,
    RegularityReport,
    box_exploration,
    census,
    estimate_local_badness,
    grow_cluster,
    one_arm_event,
    regularity_check,
)
from .disjoint_paths import (
    OpenSubgraph,
    WitnessSet,
    count_disjoint_crossings,
    max_edge_disjoint,
    multi_arm_event,
)
from .oracle import EventPredicate, FiniteGraph, lattice_region_graph
from .estimators import (
    EstimatorConfig,
    ExponentFit,
    PcEstimate,
    PointEstimate,
    boundary_sum,
    estimate_cluster_tail,
    estimate_multi_arm,
    estimate_one_arm,
    estimate_pc,
    estimate_two_point,
    fit_exponent,
    lowmass_statistic,
    second_moment_check,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BoundaryCensus",
    "Cluster",
    "Edge",
    "EstimatorConfig",
    "EventPredicate",
    "ExplorationTrace",
    "ExponentFit",
    "FieldConfig",
    "FiniteGraph",
    "GrowthBudget",
    "LatticeSpec",
    "OpenSubgraph",
    "PcEstimate",
    "PointEstimate",
    "RegularityReport",
    "ResourceError",
    "UsageError",
    "WitnessSet",
    "boundary_membership",
    "boundary_size",
    "boundary_sum",
    "box_exploration",
    "canonical_edge",
    "census",
    "count_disjoint_crossings",
    "edge_between",
    "edge_open",
    "edge_uniform",
    "enumerate_box",
    "estimate_cluster_tail",
    "estimate_local_badness",
    "estimate_multi_arm",
    "estimate_one_arm",
    "estimate_pc",
    "estimate_two_point",
    "fit_exponent",
    "grow_cluster",
    "lattice_region_graph",
    "lowmass_statistic",
    "max_edge_disjoint",
    "multi_arm_event",
    "neighbors",
    "norms",
    "one_arm_event",
    "regularity_check",
    "second_moment_check",
    "__version__",
]
