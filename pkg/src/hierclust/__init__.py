"""Hierarchical clustering under diameter, radius and discrete-radius costs:
exact optima, greedy and nesting-based hierarchies, price-of-hierarchy
computation and a lower-bound instance with certificates."""

from ._backend import BACKEND
from .errors import HierClustError
from .exact import OptimalProfile, optimal_clustering, optimal_cost, optimal_profile
from .greedy import (
    complete_linkage,
    farthest_first_hierarchy,
    gonzales_ordering,
    mondal_hierarchy,
    nearest_center_clustering,
)
from .hierarchy import (
    ApproximationProfile,
    HierarchicalSequence,
    MergeHierarchy,
    approximation_profile,
    exhaustive_price_of_hierarchy,
    extend_sequence,
)
from .metric import (
    Clustering,
    CostKind,
    FiniteMetricSpace,
    cluster_cost,
    clustering_cost,
    load_space,
    save_space,
    validate_metric,
)
from .nesting import NestingParams, augment, improved_hierarchy, lin_hierarchy

__version__ = "0.1.0"
