"""Bad clusters, kernels and anchor sets of a hierarchy on the layered
instance, and the lower-bound certificate they yield.

At level ``l`` the hierarchy is cut at ``N_k / (Gamma N_{l-1})`` blocks
(all singletons at level 0).  A block is *bad* at level ``l`` when the
union ``W`` of the kernels of the bad level-``l-1`` blocks inside it lies in
one component of ``G_a`` but not of ``G_{a-1}`` for some anchor ``a >= l``;
its kernel is then ``W``.  Anchor sets are inherited through ``prev``
links, which makes each top-level bad block the end of a chain whose
anchor set lower-bounds the hierarchy's cost at several levels at once.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoBadClusterAtTopLevel, NotBad, SizeMismatch
from ..metric import TOL, Clustering, CostKind, clustering_cost
from .instance import canonical_cost
from .sequences import analyze_sequence

DEFAULT_BUDGET = 10_000


@dataclass
class BadCluster:
    level: int
    members: np.ndarray
    kernel: np.ndarray
    anchor: int
    anc: tuple
    prev: int | None = None

    @property
    def signature(self):
        return int(self.members[0])


@dataclass
class TraceLevel:
    level: int
    size: int
    labels: np.ndarray = field(repr=False)
    bad: list = field(repr=False)

    @property
    def kernel_mass(self):
        return sum(len(c.kernel) for c in self.bad)


@dataclass
class BadClusterTrace:
    k: int
    levels: list

    def bad(self, level):
        return self.levels[level].bad

    def find(self, level, members):
        """Index of the bad cluster at ``level`` with exactly these members."""
        members = np.sort(np.asarray(list(members), dtype=np.int64))
        for j, c in enumerate(self.bad(level)):
            if len(c.members) == len(members) and np.array_equal(c.members, members):
                return j
        raise NotBad(f"no bad cluster at level {level} with these members")

    def chain(self, level, index):
        """Bad clusters linked by ``prev`` from ``(level, index)`` down to level 0."""
        out = []
        while index is not None:
            c = self.bad(level)[index]
            out.append(c)
            index, level = c.prev, level - 1
        return out


def _anchor(inst, comps, kernel):
    for j, lab in enumerate(comps):
        if np.all(lab[kernel] == lab[kernel[0]]):
            return j
    raise AssertionError("G_k is connected")


def _groups(labels):
    order = np.argsort(labels, kind="stable")
    cuts = np.flatnonzero(np.diff(labels[order])) + 1
    return {int(labels[g[0]]): g for g in np.split(order, cuts)}


def trace_sizes(inst):
    """Block counts examined at levels ``0..k``."""
    return [inst.n] + [inst.block_count(l) for l in range(1, inst.k + 1)]


def trace_bad_clusters(inst, hier):
    """Follow bad clusters, kernels and anchor sets through ``hier``.

    ``prev`` ties are broken by the smallest member: among sub-blocks with
    the same anchor (copy case) and among minimisers of the anchor-set sum.
    """
    if hier.n != inst.n:
        raise SizeMismatch(f"hierarchy has {hier.n} points, instance has {inst.n}")
    sizes = trace_sizes(inst)
    cuts = hier.level_labels(sizes)
    comps = [inst.component_labels(j) for j in range(inst.k + 1)]

    pts = np.arange(inst.n)
    level0 = [BadCluster(0, pts[p:p + 1], pts[p:p + 1], 0, ()) for p in range(inst.n)]
    levels = [TraceLevel(0, sizes[0], cuts[sizes[0]], level0)]

    for l in range(1, inst.k + 1):
        labels = cuts[sizes[l]]
        below = levels[-1].bad
        inside = {}
        for j, d in enumerate(below):
            inside.setdefault(int(labels[d.members[0]]), []).append(j)
        bad = []
        for lab, members in sorted(_groups(labels).items(), key=lambda kv: kv[1][0]):
            subs = inside.get(lab)
            if not subs:
                continue
            kernel = np.sort(np.concatenate([below[j].kernel for j in subs]))
            a = _anchor(inst, comps, kernel)
            if a < l:
                continue
            if l == 1:
                prev = int(kernel[0])
                anc = (a,)
            else:
                same = [j for j in subs if below[j].anchor == a]
                if same:
                    prev = min(same, key=lambda j: below[j].signature)
                    anc = below[prev].anc
                else:
                    prev = min(subs, key=lambda j: (sum(below[j].anc), below[j].signature))
                    anc = tuple(sorted(below[prev].anc + (a,)))
            bad.append(BadCluster(l, np.sort(members), kernel, a, anc, prev))
        levels.append(TraceLevel(l, sizes[l], labels, bad))
    return BadClusterTrace(inst.k, levels)


def _variant(kind):
    return 1 if CostKind.parse(kind) is CostKind.DISCRETE_RADIUS else 2


@dataclass(frozen=True)
class Certificate:
    """Lower bound on a hierarchy's ratio read off one top-level bad cluster.

    ``chain`` lists ``(level, smallest member, size)`` from level ``k`` down.
    """

    kind: CostKind
    certified_ratio: float
    t: int
    anchors: tuple
    chain: tuple

    def as_dict(self):
        return {
            "cost_kind": self.kind.short,
            "anchors": list(self.anchors),
            "chain": [{"level": l, "min_member": m, "size": s} for l, m, s in self.chain],
            "certified_ratio": self.certified_ratio,
            "t": self.t,
        }


def certify_lower_bound(inst, trace, kind):
    """Best certificate over the bad clusters at level ``k``.

    For anchors ``0 = l_0 < l_1 < ... < l_s`` the bound is the largest term
    ``(l_t + delta * (l_0 + ... + l_{t-1})) / (l_{t-1} + 1)``.
    """
    kind = CostKind.parse(kind)
    top = trace.bad(inst.k)
    if not top:
        raise NoBadClusterAtTopLevel("no bad cluster at the top level")
    best = None
    for j, c in enumerate(top):
        ratio, t = analyze_sequence((0,) + tuple(c.anc), _variant(kind))
        if best is None or ratio > best[0]:
            best = (ratio, t, j)
    ratio, t, j = best
    chain = tuple((c.level, c.signature, len(c.members)) for c in trace.chain(inst.k, j))
    return Certificate(kind, float(ratio), t, tuple(top[j].anc), chain)


def level_costs(inst, space, trace, kind):
    """Measured cost of the hierarchy at every traced level ``1..k``."""
    return [clustering_cost(space, Clustering.from_labels(trace.levels[l].labels), kind)
            for l in range(1, inst.k + 1)]


def measured_ratio(inst, space, trace, kind):
    """Largest ratio, over traced levels, between the hierarchy's cost and
    the cost of the matching canonical clustering."""
    costs = level_costs(inst, space, trace, kind)
    return max(c / canonical_cost(l, kind) for l, c in enumerate(costs, start=1))


@dataclass(frozen=True)
class AnchorCheck:
    """Result of :func:`anchor_distance_check`; truthy when both bounds hold.

    Margins are measured minus required (nonnegative when the bound holds).
    """

    radius_ok: bool
    diameter_ok: bool
    radius_margin: float
    steiner_margin: float
    diameter_margin: float
    sampled: bool

    def __bool__(self):
        return self.radius_ok and self.diameter_ok


def anchor_distance_check(inst, space, trace, level, cluster, budget=DEFAULT_BUDGET, seed=0):
    """Check the kernel distance bounds of a bad cluster directly on the metric.

    ``cluster`` is an index into ``trace.bad(level)`` or a collection of
    members.  Every point ``Z`` must have a kernel point at distance at least
    the anchor-set sum; Steiner candidates must reach half the diameter
    bound; and the kernel diameter must be at least
    ``anchor + 2 * sum(anchor set without the anchor)``.  When the number
    of centers exceeds ``budget``, a seeded uniform sample is swept.
    """
    bad = trace.bad(level)
    if isinstance(cluster, (int, np.integer)):
        if not 0 <= cluster < len(bad):
            raise NotBad(f"level {level} has {len(bad)} bad clusters")
        c = bad[cluster]
    else:
        c = bad[trace.find(level, cluster)]
    ker = c.kernel
    need_rad = float(sum(c.anc))
    need_diam = c.anchor + 2.0 * (sum(c.anc) - (c.anchor if c.anchor in c.anc else 0))

    pts = np.arange(space.n)
    cand = np.arange(space.centers.shape[0]) if space.has_candidates else np.zeros(0, dtype=int)
    sampled = len(pts) + len(cand) > budget
    if sampled:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(pts) + len(cand), size=budget, replace=False))
        pts, cand = pick[pick < space.n], pick[pick >= space.n] - space.n

    reach = space.dist[np.ix_(pts, ker)].max(axis=1).min() if len(pts) else np.inf
    steiner = space.centers[np.ix_(cand, ker)].max(axis=1).min() if len(cand) else np.inf
    diam = space.dist[np.ix_(ker, ker)].max()
    return AnchorCheck(
        radius_ok=bool(reach >= need_rad - TOL and steiner >= need_diam / 2 - TOL),
        diameter_ok=bool(diam >= need_diam - TOL),
        radius_margin=float(reach - need_rad),
        steiner_margin=float(steiner - need_diam / 2),
        diameter_margin=float(diam - need_diam),
        sampled=sampled,
    )
