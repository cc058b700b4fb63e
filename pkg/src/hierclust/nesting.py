"""Nesting-based hierarchies built from a family of reference clusterings.

Two builders are provided.

``lin_*``
    Buckets the reference levels by cost in powers of ``2 * gamma`` and
    coarsens the running clustering with :func:`augment` at the cheapest
    level of each bucket.  The result is a ``4 * gamma * delta``
    approximation relative to the reference costs.

``improved_*``
    Buckets in powers of ``alpha`` and coarsens through parent blocks: each
    running block remembers the reference block it was last nested into,
    and blocks are grouped by the first reference block meeting that
    parent.  For the diameter and radius this gives the factor
    ``alpha * (2 / (alpha - 1) + 1)``, minimised at ``alpha = 1 + sqrt(2)``.

Both require all distances to exceed 2.  By default the metric is rescaled
to minimum distance ``2 + 1e-6`` when needed; the returned hierarchy is
purely combinatorial, so its costs are read off in original units.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    BadAlpha,
    DistancePreconditionViolated,
    IncompleteProfile,
    KindUnsupported,
    NestingBoundViolated,
    SizePreconditionViolated,
)
from .exact import _lex_witness
from .hierarchy import HierarchicalSequence, extend_sequence
from .metric import TOL, Clustering, CostKind, cluster_center, clustering_cost, scale_metric

MIN_GAP = 2.0 + 1e-6
FALLBACK_ATOMS = 16
SQRT2_STEP = 1.0 + math.sqrt(2.0)


@dataclass(frozen=True)
class NestingParams:
    """``(gamma, delta)`` of a constructive nesting for one objective."""

    gamma: float
    delta: float
    kind: CostKind

    def __post_init__(self):
        kind = CostKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        want = (1.0, 1.0) if kind is CostKind.DISCRETE_RADIUS else (2.0, 1.0)
        if (self.gamma, self.delta) != want:
            raise ValueError(f"only the ({want[0]:g},{want[1]:g}) nesting is implemented for {kind.value}")

    @classmethod
    def for_kind(cls, kind):
        kind = CostKind.parse(kind)
        if kind is CostKind.DISCRETE_RADIUS:
            return cls(1.0, 1.0, kind)
        return cls(2.0, 1.0, kind)

    @property
    def guarantee(self):
        return 4.0 * self.gamma * self.delta


def improved_guarantee(alpha):
    """``alpha * (2 / (alpha - 1) + 1)``; equals ``3 + 2 sqrt 2`` at ``1 + sqrt 2``."""
    return alpha * (2.0 / (alpha - 1.0) + 1.0)


# -- augment -------------------------------------------------------------------

def _first_hit(blocks, target_labels):
    """Smallest target block index met by each block."""
    return [int(target_labels[list(b)].min()) for b in blocks]


def _group(blocks, keys):
    groups = {}
    for b, key in zip(blocks, keys):
        groups.setdefault(key, []).extend(b)
    return list(groups.values())


def _drad_exact_nesting(space, fine, target, bound):
    """Coarsening of ``fine`` into at most ``len(target)`` unions of discrete
    radius at most ``bound``, found by subset search over fine blocks."""
    m = len(fine)
    if m > FALLBACK_ATOMS:
        raise NestingBoundViolated(
            f"discrete-radius nesting needs the exact fallback but {m} blocks exceed {FALLBACK_ATOMS}")
    atom = fine.labels()
    # rows: candidate centers (points); columns: fine blocks
    ecc_atoms = np.stack([space.dist[:, list(b)].max(axis=1) for b in fine.blocks], axis=1)
    ecc = kernels.eccentricity_table(ecc_atoms)
    masks = np.arange(1 << m)
    inside = ((masks[None, :] >> atom[:, None]) & 1).astype(bool)
    table = np.where(inside, ecc, np.inf).min(axis=0)
    table[0] = 0.0
    f = kernels.min_partition(table <= bound + TOL)
    if f[-1] > len(target):
        raise NestingBoundViolated("no discrete-radius nesting within the certified bound")
    groups = _lex_witness(table, f, bound)
    return [[p for a in g for p in fine.blocks[a]] for g in groups]


def augment(space, fine, target, params, reference_costs=None):
    """Coarsen ``fine`` to at most ``len(target)`` blocks.

    Diameter and radius: every fine block joins the smallest-index target
    block it meets.  Discrete radius: every fine block joins the target block
    holding its own center; if some merged block then exceeds the bound, an
    exact search over unions of fine blocks is used instead.

    The bound ``gamma * cost(fine) + delta * cost(target)`` is checked on
    the result and a violation raises :class:`NestingBoundViolated`.

    Parameters
    ----------
    reference_costs : tuple of float, optional
        Precomputed ``(cost(fine), cost(target))``.
    """
    if len(fine) <= len(target):
        raise SizePreconditionViolated(
            f"fine clustering has {len(fine)} blocks, target has {len(target)}")
    kind = params.kind
    if reference_costs is None:
        reference_costs = (clustering_cost(space, fine, kind), clustering_cost(space, target, kind))
    bound = params.gamma * reference_costs[0] + params.delta * reference_costs[1]
    tlab = target.labels()
    if kind is CostKind.DISCRETE_RADIUS:
        keys = [int(tlab[cluster_center(space, b, kind)[1]]) for b in fine.blocks]
    else:
        keys = _first_hit(fine.blocks, tlab)
    result = Clustering(_group(fine.blocks, keys), space.n)
    cost = clustering_cost(space, result, kind)
    if cost > bound + TOL and kind is CostKind.DISCRETE_RADIUS:
        result = Clustering(_drad_exact_nesting(space, fine, target, bound), space.n)
        cost = clustering_cost(space, result, kind)
    if cost > bound + TOL:
        raise NestingBoundViolated(f"nesting cost {cost} exceeds bound {bound}")
    return result


# -- shared set-up ---------------------------------------------------------------

@dataclass
class NestingStep:
    """Audit record of one iteration ``i``.

    ``level`` is ``None`` when the bucket was empty and the clustering was
    copied.  Costs and bounds are in the (possibly rescaled) working units.
    """

    i: int
    level: object
    lower: float
    upper: float
    blocks: int
    cost: float
    bound: float
    center_radius: float = float("nan")
    parent_reach: float = float("nan")
    reach_bound: float = float("nan")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class NestingRun:
    """Sequence built by a nesting algorithm together with its audit trail."""

    sequence: HierarchicalSequence
    steps: list = field(default_factory=list)
    scale: float = 1.0
    t: int = 1
    base: float = 2.0

    def max_violation(self):
        """Largest ``cost - bound`` over all steps (``<= 0`` means clean)."""
        gaps = [s.cost - s.bound for s in self.steps]
        gaps += [s.center_radius - s.bound for s in self.steps if not math.isnan(s.center_radius)]
        gaps += [s.parent_reach - s.reach_bound for s in self.steps if not math.isnan(s.parent_reach)]
        return max(gaps, default=-math.inf)


def _prepare(space, profile, kind, auto_scale):
    n = space.n
    profile.validate(kind, n)
    gap = space.min_distance()
    scale = 1.0
    if gap <= 2.0:
        if not auto_scale:
            raise DistancePreconditionViolated(f"minimum distance {gap} is not above 2")
        scale = MIN_GAP / gap
        space = scale_metric(space, scale)
    costs = [c * scale for c in profile.costs]
    if n > 1 and costs[0] <= 1.0:
        raise IncompleteProfile("reference cost of the one-block level must exceed 1 after scaling")
    if len(profile.witness(n)) != n:
        raise IncompleteProfile("reference level n must be the singletons")
    return space, costs, scale


def _num_rounds(delta_cost, base):
    """``t`` with ``base**(t-2) < delta_cost <= base**(t-1)``."""
    t = math.ceil(math.log(delta_cost) / math.log(base)) + 1
    while base ** (t - 1) < delta_cost:
        t += 1
    while t > 2 and base ** (t - 2) >= delta_cost:
        t -= 1
    return t


def _bucket_level(costs, lo, hi):
    for k, c in enumerate(costs, start=1):
        if lo < c <= hi:
            return k
    return None


def _trivial_run(space, scale=1.0):
    seq = HierarchicalSequence([Clustering.singletons(space.n), Clustering.whole(space.n)]
                               if space.n > 1 else [Clustering.singletons(space.n)])
    return NestingRun(seq, [], scale, 1)


# -- Lin et al. framework --------------------------------------------------------

def lin_sequence(space, profile, params, auto_scale=True):
    """Hierarchical sequence of the bucketed augment framework."""
    kind = params.kind
    if space.n == 1:
        return _trivial_run(space)
    work, costs, scale = _prepare(space, profile, kind, auto_scale)
    base = 2.0 * params.gamma
    t = _num_rounds(costs[0], base)
    cur = profile.witness(space.n)
    cur_cost = 0.0
    members, trace = [cur], []
    for i in range(t - 1, 0, -1):
        lo, hi = base ** (t - i - 1), base ** (t - i)
        level = _bucket_level(costs, lo, hi)
        bound = cur_cost
        if level is not None and len(cur) > len(profile.witness(level)):
            target = profile.witness(level)
            bound = params.gamma * cur_cost + params.delta * costs[level - 1]
            cur = augment(work, cur, target, params, (cur_cost, costs[level - 1]))
            cur_cost = clustering_cost(work, cur, kind)
        trace.append(NestingStep(i, level, lo, hi, len(cur), cur_cost, bound))
        members.append(cur)
    return NestingRun(HierarchicalSequence(members), trace, scale, t, base)


def lin_hierarchy(space, profile, params, auto_scale=True):
    """Hierarchy from :func:`lin_sequence`; ratio at most ``4 gamma delta``."""
    run = lin_sequence(space, profile, params, auto_scale)
    return extend_sequence(run.sequence, space, params.kind)


# -- parent-based nesting --------------------------------------------------------

def improved_sequence(space, profile, kind, alpha=SQRT2_STEP, auto_scale=True):
    """Hierarchical sequence of the parent-based nesting.

    Every iteration records the realised cost, the bound
    ``alpha^(t-i) + 2 * sum_{l=1}^{t-i-1} alpha^l`` and, for the radius, the
    largest distance from a parent block's optimal center to the block.  For
    the diameter the largest distance from a parent point to its block is
    checked against ``sum_{l=1}^{t-i} alpha^l``.
    """
    kind = CostKind.parse(kind)
    if kind is CostKind.DISCRETE_RADIUS:
        raise KindUnsupported("the parent-based nesting covers diameter and radius; use lin_hierarchy")
    if not alpha > 1:
        raise BadAlpha(f"step size must exceed 1, got {alpha}")
    if space.n == 1:
        return _trivial_run(space)
    work, costs, scale = _prepare(space, profile, kind, auto_scale)
    n = work.n
    t = _num_rounds(costs[0], alpha)
    blocks = [list(b) for b in profile.witness(n).blocks]
    parents = [np.array(b) for b in blocks]
    members = [Clustering(blocks, n)]
    trace = []
    for i in range(t - 1, 0, -1):
        lo, hi = alpha ** (t - i - 1), alpha ** (t - i)
        level = _bucket_level(costs, lo, hi)
        if level is not None:
            target = profile.witness(level)
            tlab = target.labels()
            nest = [int(tlab[p].min()) for p in parents]
            grouped = {}
            for b, o in zip(blocks, nest):
                grouped.setdefault(o, []).extend(b)
            order = sorted(grouped)
            blocks = [grouped[o] for o in order]
            parents = [np.array(target.blocks[o]) for o in order]
        cur = Clustering(blocks, n)
        members.append(cur)
        span = t - i
        bound = alpha ** span + 2.0 * sum(alpha ** l for l in range(1, span))
        step = NestingStep(i, level, lo, hi, len(cur), clustering_cost(work, cur, kind), bound)
        if kind is CostKind.RADIUS:
            reach = 0.0
            for b, par in zip(blocks, parents):
                _, c = cluster_center(work, par, kind)
                reach = max(reach, float(work.center_pool[c, b].max()))
            step.center_radius = reach
        else:
            step.parent_reach = max(float(work.dist[np.ix_(par, b)].max())
                                    for b, par in zip(blocks, parents))
            step.reach_bound = sum(alpha ** l for l in range(1, span + 1))
        trace.append(step)
    return NestingRun(HierarchicalSequence(members), trace, scale, t, alpha)


def improved_hierarchy(space, profile, kind, alpha=SQRT2_STEP, auto_scale=True):
    """Hierarchy from :func:`improved_sequence`; ratio at most
    :func:`improved_guarantee` of ``alpha``."""
    kind = CostKind.parse(kind)
    run = improved_sequence(space, profile, kind, alpha, auto_scale)
    return extend_sequence(run.sequence, space, kind)
