"""Greedy baselines: farthest-first traversal, the farthest-first hierarchy,
complete linkage and the parent-tree hierarchy built on Gonzales radii."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hierarchy import MergeHierarchy, from_edge_order
from .metric import TOL, Clustering, CostKind


@dataclass(frozen=True)
class GonzalesOrdering:
    """Farthest-first order and insertion radii.

    ``radii[j]`` is the distance of ``order[j]`` to the earlier points, with
    ``radii[0] = inf``.
    """

    order: tuple
    radii: tuple

    @property
    def rank(self):
        """Position of every point in the order."""
        r = np.empty(len(self.order), dtype=np.int64)
        r[list(self.order)] = np.arange(len(self.order))
        return r

    def radius_of(self):
        """Insertion radius indexed by point."""
        out = np.empty(len(self.order))
        out[list(self.order)] = self.radii
        return out


def _priority(n, seed):
    if seed is None:
        return np.arange(n, dtype=np.int64)
    return np.random.default_rng(seed).permutation(n).astype(np.int64)


def gonzales_ordering(space, start=0, seed=None):
    """Farthest-first traversal from ``start``.

    Ties within ``1e-9`` go to the smallest point index, or to a random
    priority drawn from ``seed`` when one is given.
    """
    if not 0 <= start < space.n:
        raise IndexError(f"start {start} out of range")
    order, radii = kernels.gonzales(space.dist, start, _priority(space.n, seed), TOL)
    return GonzalesOrdering(tuple(int(x) for x in order), tuple(float(r) for r in radii))


def nearest_center_clustering(space, ordering, k):
    """Assign each point to its nearest center among the first ``k`` of
    ``ordering`` (ties to the earlier center)."""
    centers = np.asarray(ordering.order[:k])
    lab = np.argmin(space.dist[centers], axis=0)
    return Clustering.from_labels(lab)


def _tree_hierarchy(ordering, parent):
    # H_k keeps the edges of x_{k+1}, ..., x_n; adding them back in reverse
    # order of insertion yields one binary merge per level.
    order = ordering.order
    edges = [(order[i], parent[order[i]]) for i in range(len(order) - 1, 0, -1)]
    return from_edge_order(len(order), edges)


def _pick(cands, dist_row, prio):
    """Nearest candidate, ties within tolerance broken by ``prio``."""
    dv = dist_row[cands]
    near = cands[dv <= dv.min() + TOL]
    return int(near[np.argmin(prio[near])])


def farthest_first_hierarchy(space, start=0):
    """Literature baseline built on the farthest-first order.

    Point ``x_i`` (``i >= 2``) gets level ``floor(log2(R / R_i)) + 1`` with
    ``R = R_2``; the first point has level 0.  Its parent is the nearest
    earlier point of strictly smaller level, and ``H_k`` keeps the tree
    edges of ``x_{k+1}, ..., x_n``.  The doubling granularity (base 2 with
    level 0 reserved for the root) is the standard choice giving factor 8.
    """
    n = space.n
    ordering = gonzales_ordering(space, start)
    if n == 1:
        return MergeHierarchy(1, [])
    order = np.asarray(ordering.order)
    radii = np.asarray(ordering.radii)
    top = radii[1]
    level = np.zeros(n, dtype=np.int64)
    level[1:] = np.floor(np.log2(top / radii[1:]) + 1e-12).astype(np.int64) + 1
    prio = ordering.rank
    parent = {}
    for i in range(1, n):
        earlier = order[:i][level[:i] < level[i]]
        parent[int(order[i])] = _pick(earlier, space.dist[order[i]], prio)
    return _tree_hierarchy(ordering, parent)


def mondal_hierarchy(space, start=0, seed=None):
    """Parent-tree hierarchy on Gonzales radii.

    ``N(x)`` is the nearest point ``y`` with ``R_x <= R_y / 2``; ties go to
    the smallest Gonzales index, or to a seeded random priority.  ``H_k``
    consists of the tree components after removing the edges of
    ``x_2, ..., x_k``.

    Returns
    -------
    hierarchy : MergeHierarchy
    parent : dict
        Parent point of every point except the first in the order.
    """
    n = space.n
    ordering = gonzales_ordering(space, start, seed)
    if n == 1:
        return MergeHierarchy(1, []), {}
    order = np.asarray(ordering.order)
    rad = ordering.radius_of()
    prio = ordering.rank if seed is None else _priority(n, seed)
    parent = {}
    for x in order[1:]:
        ok = np.flatnonzero(rad[x] <= rad / 2 + TOL)
        ok = ok[ok != x]
        parent[int(x)] = _pick(ok, space.dist[x], prio)
    return _tree_hierarchy(ordering, parent), parent


# -- complete linkage --------------------------------------------------------

def _slots_to_hierarchy(n, pairs):
    ids = list(range(n))
    merges = []
    for a, b in pairs:
        merges.append((ids[a], ids[b]))
        ids[a] = n + len(merges) - 1
    return MergeHierarchy(n, merges)


def _complete_linkage_center(space, kind):
    # Slots keep the smaller representative, which is the smallest member.
    n = space.n
    pool = space.center_pool
    discrete = kind is CostKind.DISCRETE_RADIUS
    ecc = pool.T.copy()  # ecc[slot] = max distance from each pool row to the slot
    member = np.eye(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    slots = np.arange(n)
    nnv = np.full(n, np.inf)
    nni = np.full(n, -1)

    def pair_costs(x, cand):
        m = np.maximum(ecc[x][None, :], ecc[cand])
        if discrete:
            allowed = member[x][None, :] | member[cand]
            return np.where(allowed, m[:, :n], np.inf).min(axis=1)
        return m.min(axis=1)

    def refresh(x):
        cand = slots[active & (slots != x)]
        if cand.size == 0:
            nnv[x], nni[x] = np.inf, -1
            return
        v = pair_costs(x, cand)
        j = np.lexsort((np.maximum(cand, x), np.minimum(cand, x), v))[0]
        nnv[x], nni[x] = v[j], cand[j]

    for x in range(n):
        refresh(x)
    pairs = []
    for _ in range(n - 1):
        live = slots[active & (nni >= 0)]
        lo = np.minimum(live, nni[live])
        hi = np.maximum(live, nni[live])
        j = np.lexsort((hi, lo, nnv[live]))[0]
        a, b = int(lo[j]), int(hi[j])
        pairs.append((a, b))
        active[b] = False
        ecc[a] = np.maximum(ecc[a], ecc[b])
        member[a] |= member[b]
        refresh(a)
        others = slots[active & (slots != a)]
        for x in others:
            if nni[x] in (a, b):
                refresh(x)
            else:
                v = pair_costs(x, np.array([a]))[0]
                key = (v, min(x, a), max(x, a))
                if key < (nnv[x], min(x, nni[x]), max(x, nni[x])):
                    nnv[x], nni[x] = v, a
    return pairs


def complete_linkage(space, kind):
    """Agglomerative hierarchy merging the pair whose union is cheapest.

    Ties are broken by the smallest members of the two clusters: first the
    smaller of the two minima, then the larger.
    """
    kind = CostKind.parse(kind)
    n = space.n
    if kind is CostKind.DIAMETER:
        pairs, _ = kernels.complete_linkage_diameter(space.dist)
        pairs = [(int(a), int(b)) for a, b in pairs]
    else:
        pairs = _complete_linkage_center(space, kind)
    return _slots_to_hierarchy(n, pairs)


def mondal_search(n, trials, seed=0, start=0, limit=16):
    """Randomised hunt for bad discrete-radius behaviour of :func:`mondal_hierarchy`.

    Samples repaired random metrics on ``n`` points and keeps the one with
    the largest max-level ratio against the exact optimum.  Returns
    ``(ratio, space, seed_used)``; this is exploratory and carries no
    guarantee of reaching any particular ratio.
    """
    from .exact import optimal_profile
    from .generators import repaired_metric
    from .hierarchy import approximation_profile

    rng = np.random.default_rng(seed)
    best = (-math.inf, None, None)
    for _ in range(trials):
        s = int(rng.integers(2 ** 31))
        space = repaired_metric(n, s, integer=True)
        prof = optimal_profile(space, CostKind.DISCRETE_RADIUS, limit)
        hier, _ = mondal_hierarchy(space, start, seed=s)
        r = approximation_profile(hier, prof, space, CostKind.DISCRETE_RADIUS).max_ratio
        if r > best[0]:
            best = (r, space, s)
    return best

