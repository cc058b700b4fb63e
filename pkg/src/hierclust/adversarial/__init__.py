"""Lower-bound instance for hierarchical clustering and its certificates."""

from .instance import (
    AdversarialInstance,
    build_instance,
    canonical_cost,
    canonical_partition,
    canonical_profile,
    components,
    cost_floor,
    instance_metric,
    level_sizes,
)
from .sequences import (
    SequenceAnalysis,
    analyze_sequence,
    discriminant,
    feasible_sequence_search,
    min_k_for_epsilon,
    roots,
)
from .trace import (
    AnchorCheck,
    BadClusterTrace,
    Certificate,
    anchor_distance_check,
    certify_lower_bound,
    measured_ratio,
    trace_bad_clusters,
)
