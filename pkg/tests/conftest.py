import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hierclust.generators import line_metric, repaired_metric, uniform_metric
from hierclust.metric import Clustering, clustering_cost

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def k2():
    """Depth-2 layered instance and its metric (2187 points)."""
    from hierclust.adversarial import build_instance, instance_metric

    inst = build_instance(2)
    return inst, instance_metric(inst)


@pytest.fixture(scope="session")
def hierarchies(k2):
    from hierclust.adversarial import canonical_profile
    from hierclust.greedy import complete_linkage, farthest_first_hierarchy, mondal_hierarchy
    from hierclust.nesting import improved_hierarchy

    inst, space = k2
    prof = canonical_profile(inst, space, "diam")
    return {
        "cl": complete_linkage(space, "diam"),
        "ff": farthest_first_hierarchy(space),
        "mondal": mondal_hierarchy(space)[0],
        "improved": improved_hierarchy(space, prof, "diam"),
    }


@pytest.fixture(scope="session")
def traces(k2, hierarchies):
    from hierclust.adversarial import trace_bad_clusters

    return {name: trace_bad_clusters(k2[0], h) for name, h in hierarchies.items()}


@pytest.fixture
def line4():
    return line_metric(4)


@pytest.fixture
def uniform5():
    return uniform_metric(5, 3.0)


def set_partitions(items):
    """Every set partition of ``items`` (restricted growth strings)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def brute_force_optimum(space, k, kind):
    """Minimum clustering cost over all partitions into at most ``k`` blocks."""
    best = np.inf
    for part in set_partitions(range(space.n)):
        if len(part) <= k:
            best = min(best, clustering_cost(space, Clustering(part, space.n), kind))
    return best


@st.composite
def small_metrics(draw, min_n=1, max_n=7, integer=True):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2 ** 20))
    return repaired_metric(n, seed, integer=integer)


def all_pairs(n):
    return itertools.combinations(range(n), 2)
