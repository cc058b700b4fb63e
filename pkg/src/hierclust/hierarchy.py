"""Merge hierarchies, sequence extension, approximation profiles and the
exhaustive price of hierarchy on tiny instances.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GroundSetMismatch,
    InstanceTooLarge,
    InvalidHierarchy,
    InvalidSequence,
    KindMismatch,
    SizeMismatch,
)
from .exact import optimal_profile, subset_costs
from .metric import TOL, Clustering, CostKind, clustering_cost

POH_LIMIT = 8
MULTI_MERGE_LIMIT = 6


class MergeHierarchy:
    """Hierarchical clustering stored as merge events.

    Singletons carry ids ``0..n-1`` and the ``j``-th merge event creates id
    ``n + j`` from two or more active ids.  ``steps`` optionally groups
    consecutive events into atomic steps (default: one event per step).
    The level ``H_i`` is the state after the fewest whole steps that leave at
    most ``i`` blocks.
    """

    def __init__(self, n, merges, steps=None):
        self.n = int(n)
        self.merges = tuple(tuple(int(c) for c in ev) for ev in merges)
        if steps is None:
            steps = [1] * len(self.merges)
        self.steps = tuple(int(s) for s in steps)
        self._validate()

    def _validate(self):
        n = self.n
        if n < 1:
            raise InvalidHierarchy("hierarchy needs at least one point")
        if sum(self.steps) != len(self.merges) or any(s < 1 for s in self.steps):
            raise InvalidHierarchy("steps must partition the merge events")
        active = set(range(n))
        for j, ev in enumerate(self.merges):
            if len(ev) < 2 or len(set(ev)) != len(ev):
                raise InvalidHierarchy(f"merge {j} must name at least two distinct clusters")
            missing = [c for c in ev if c not in active]
            if missing:
                raise InvalidHierarchy(f"merge {j} uses inactive cluster ids {missing}")
            active.difference_update(ev)
            active.add(n + j)
        if len(active) != 1:
            raise InvalidHierarchy(f"hierarchy ends with {len(active)} clusters, expected 1")

    @property
    def is_binary(self):
        return all(len(ev) == 2 for ev in self.merges)

    def __eq__(self, other):
        return (isinstance(other, MergeHierarchy) and self.n == other.n
                and self.merges == other.merges and self.steps == other.steps)

    def __repr__(self):
        return f"MergeHierarchy(n={self.n}, merges={len(self.merges)}, steps={len(self.steps)})"

    def _step_ranges(self):
        pos = 0
        for size in self.steps:
            yield range(pos, pos + size)
            pos += size

    def replay(self):
        """Yield ``(block_count, labels)`` after every step, starting from the
        singletons.

        ``labels`` maps each point to its current cluster id and is updated in
        place, so copy it if it must outlive the iteration.
        """
        labels = np.arange(self.n)
        members = {p: [p] for p in range(self.n)}
        count = self.n
        yield count, labels
        for rng in self._step_ranges():
            for j in rng:
                ev = self.merges[j]
                pts = [p for c in ev for p in members.pop(c)]
                labels[pts] = self.n + j
                members[self.n + j] = pts
                count -= len(ev) - 1
            yield count, labels

    def level_labels(self, sizes):
        """Label arrays of the levels ``H_i`` for every ``i`` in ``sizes``."""
        want = sorted({int(i) for i in sizes}, reverse=True)
        for i in want:
            if not 1 <= i <= self.n:
                raise ValueError(f"level {i} outside 1..{self.n}")
        out = {}
        pending = list(want)
        for count, labels in self.replay():
            while pending and count <= pending[0]:
                out[pending.pop(0)] = labels.copy()
            if not pending:
                break
        return out

    def level(self, i):
        """The clustering ``H_i``."""
        return Clustering.from_labels(self.level_labels([i])[i])

    def levels(self):
        """All levels, indexed by ``i - 1``."""
        labs = self.level_labels(range(1, self.n + 1))
        return [Clustering.from_labels(labs[i]) for i in range(1, self.n + 1)]

    def level_costs(self, space, kind):
        """``cost(H_i)`` for ``i = 1..n`` at index ``i - 1``.

        Block costs are updated per merge: diameters from the cross distances
        between the merged parts, radii from elementwise maxima of the
        parts' eccentricity vectors over the center pool.
        """
        kind = CostKind.parse(kind)
        if space.n != self.n:
            raise SizeMismatch(f"hierarchy has {self.n} points, space has {space.n}")
        n = self.n
        d = space.dist
        pool = space.center_pool
        live = np.full(n + len(self.merges), -np.inf)
        live[:n] = 0.0
        members = {p: np.array([p]) for p in range(n)}
        ecc = {} if kind is CostKind.DIAMETER else {p: pool[:, p].copy() for p in range(n)}
        snapshots = [(n, 0.0)]
        count = n
        for rng in self._step_ranges():
            for j in rng:
                ev = self.merges[j]
                parts = [members.pop(c) for c in ev]
                pts = np.concatenate(parts)
                if kind is CostKind.DIAMETER:
                    c = max(live[x] for x in ev)
                    for a in range(len(parts)):
                        for b in range(a + 1, len(parts)):
                            c = max(c, d[np.ix_(parts[a], parts[b])].max())
                else:
                    e = ecc.pop(ev[0])
                    for x in ev[1:]:
                        e = np.maximum(e, ecc.pop(x))
                    ecc[n + j] = e
                    c = e.min() if kind is CostKind.RADIUS else e[pts].min()
                live[list(ev)] = -np.inf
                live[n + j] = c
                members[n + j] = pts
                count -= len(ev) - 1
            # the discrete radius can drop after a merge, so take a fresh max
            snapshots.append((count, float(live.max())))
        out = np.empty(n)
        s = 0
        for i in range(n, 0, -1):
            while snapshots[s][0] > i:
                s += 1
            out[i - 1] = snapshots[s][1]
        return out

    def to_dict(self):
        out = {"n": self.n, "merges": [list(ev) for ev in self.merges]}
        if any(s != 1 for s in self.steps):
            out["steps"] = list(self.steps)
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(data["n"], data["merges"], data.get("steps"))

    def save(self, path, extra=None):
        payload = self.to_dict()
        if extra:
            payload.update(extra)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def from_edge_order(n, edges):
    """Binary hierarchy obtained by adding ``edges`` one at a time.

    Each edge must join two different current components; ``n - 1`` edges
    of a spanning tree produce a complete hierarchy.
    """
    ids = list(range(n))  # cluster id per component root
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merges = []
    for u, v in edges:
        ru, rv = find(int(u)), find(int(v))
        if ru == rv:
            raise InvalidHierarchy(f"edge ({u}, {v}) closes a cycle")
        merges.append((ids[ru], ids[rv]))
        parent[rv] = ru
        ids[ru] = n + len(merges) - 1
    return MergeHierarchy(n, merges)


def from_binary_partitions(n, chain):
    """Hierarchy from a chain of partitions (tuples of bit masks), each one
    binary merge coarser than the previous, starting at the singletons."""
    ids = {1 << p: p for p in range(n)}
    merges = []
    for prev, cur in zip(chain, chain[1:]):
        gone = sorted(set(prev) - set(cur))
        made = set(cur) - set(prev)
        if len(gone) != 2 or len(made) != 1:
            raise InvalidHierarchy("consecutive partitions must differ by one binary merge")
        merges.append((ids.pop(gone[0]), ids.pop(gone[1])))
        ids[made.pop()] = n + len(merges) - 1
    return MergeHierarchy(n, merges)


def check_compatibility(fine, coarse):
    """True iff every block of ``fine`` lies inside a block of ``coarse``."""
    if fine.n != coarse.n:
        raise GroundSetMismatch(f"clusterings over {fine.n} and {coarse.n} points")
    lab = coarse.labels()
    return all(len({lab[p] for p in block}) == 1 for block in fine.blocks)


@dataclass(frozen=True)
class HierarchicalSequence:
    """Clusterings ``C^(t), ..., C^(1)`` from singletons to one block where
    each member equals or coarsens its predecessor."""

    members: tuple

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise InvalidSequence("sequence is empty")
        n = members[0].n
        if len(members[0]) != n:
            raise InvalidSequence("sequence must start with all singletons")
        if len(members[-1]) != min(n, 1):
            raise InvalidSequence("sequence must end with a single block")
        for a, b in zip(members, members[1:]):
            if b.n != n or not check_compatibility(a, b):
                raise InvalidSequence("consecutive members are not hierarchically compatible")
        object.__setattr__(self, "members", members)

    @property
    def n(self):
        return self.members[0].n

    def __len__(self):
        return len(self.members)


def extend_sequence(seq, space, kind):
    """Extend a hierarchical sequence to a full hierarchy.

    Level ``i`` receives the cheapest member with at most ``i`` blocks; ties
    go to fewer blocks, then to the later member.  The chosen members appear
    in sequence order as ``i`` decreases, so every change of choice becomes
    one atomic step merging the blocks of the earlier choice.
    """
    if not isinstance(seq, HierarchicalSequence):
        seq = HierarchicalSequence(seq)
    kind = CostKind.parse(kind)
    n = seq.n
    if space.n != n:
        raise SizeMismatch(f"sequence has {n} points, space has {space.n}")
    members = seq.members
    costs = [clustering_cost(space, c, kind) for c in members]
    sizes = [len(c) for c in members]

    chosen = []
    for i in range(n, 0, -1):
        eligible = [j for j in range(len(members)) if sizes[j] <= i]
        best = min(eligible, key=lambda j: (costs[j], sizes[j], -j))
        if not chosen or chosen[-1] != best:
            chosen.append(best)

    ids = {block: p for p in range(n) for block in [(p,)]}
    merges, steps = [], []
    for a, b in zip(chosen, chosen[1:]):
        fine, coarse = members[a], members[b]
        lab = coarse.labels()
        groups = {}
        for block in fine.blocks:
            groups.setdefault(lab[block[0]], []).append(block)
        count = 0
        for target in coarse.blocks:
            parts = groups[lab[target[0]]]
            if len(parts) < 2:
                continue
            merges.append(tuple(ids.pop(blk) for blk in parts))
            ids[target] = n + len(merges) - 1
            count += 1
        if count:
            steps.append(count)
    return MergeHierarchy(n, merges, steps)


@dataclass(frozen=True)
class ApproximationProfile:
    """Per-level algorithm cost, optimal cost and their ratio (index k - 1)."""

    alg_costs: tuple
    opt_costs: tuple
    ratios: tuple
    max_ratio: float
    argmax: int

    @property
    def n(self):
        return len(self.ratios)

    def to_csv(self, meta=None):
        lines = []
        if meta:
            lines.append("# " + " ".join(f"{k}={v}" for k, v in meta.items()))
        lines.append("k,alg_cost,opt_cost,ratio")
        for k in range(1, self.n + 1):
            lines.append(",".join([str(k)] + [fmt12(v) for v in (
                self.alg_costs[k - 1], self.opt_costs[k - 1], self.ratios[k - 1])]))
        return "\n".join(lines) + "\n"


def fmt12(value):
    """Twelve significant digits, the CSV convention of the command line."""
    return f"{value:.12g}"


def level_ratio(alg, opt):
    """``alg / opt`` with the 0/0 = 1 convention and ``inf`` for x/0, x > 0."""
    if opt > TOL:
        return alg / opt
    return 1.0 if alg <= TOL else math.inf


def approximation_profile(hier, profile, space, kind):
    """Compare every level of ``hier`` against the (optimal) ``profile``."""
    kind = CostKind.parse(kind)
    if profile.kind is not kind:
        raise KindMismatch(f"profile is for {profile.kind.value}, expected {kind.value}")
    if not hier.n == profile.n == space.n:
        raise SizeMismatch(f"sizes differ: hierarchy {hier.n}, profile {profile.n}, space {space.n}")
    alg = hier.level_costs(space, kind)
    opt = np.asarray(profile.costs, dtype=float)
    ratios = [level_ratio(a, o) for a, o in zip(alg, opt)]
    j = int(np.argmax(ratios))
    return ApproximationProfile(tuple(float(a) for a in alg), tuple(float(o) for o in opt),
                                tuple(ratios), float(ratios[j]), j + 1)


# -- exhaustive price of hierarchy ------------------------------------------

def _opt_and_table(space, kind, limit):
    if space.n > limit:
        raise InstanceTooLarge(space.n, limit)
    table = subset_costs(space, kind)
    opt = optimal_profile(space, kind).costs
    return table, opt


def _part_ratio(table, opt, part):
    return level_ratio(max(float(table[m]) for m in part), opt[len(part) - 1])


def exhaustive_price_of_hierarchy(space, kind, limit=POH_LIMIT):
    """Smallest max-level ratio over all binary merge hierarchies.

    Returns ``(value, witness)``.  Memoised over partitions: the best
    completion of a partition depends only on the partition itself.
    """
    kind = CostKind.parse(kind)
    n = space.n
    table, opt = _opt_and_table(space, kind, limit)
    memo = {}

    def best(part):
        got = memo.get(part)
        if got is not None:
            return got
        here = _part_ratio(table, opt, part)
        if len(part) == 1:
            memo[part] = (here, None)
            return memo[part]
        val, arg = math.inf, None
        for a in range(len(part)):
            for b in range(a + 1, len(part)):
                nxt = tuple(sorted(part[:a] + part[a + 1:b] + part[b + 1:] + (part[a] | part[b],)))
                v = best(nxt)[0]
                if v < val:
                    val, arg = v, nxt
        memo[part] = (max(here, val), arg)
        return memo[part]

    start = tuple(1 << p for p in range(n))
    value = best(start)[0]
    chain = [start]
    while memo[chain[-1]][1] is not None:
        chain.append(memo[chain[-1]][1])
    return value, from_binary_partitions(n, chain)


def _coarsenings(part, at_most):
    """All partitions of the blocks of ``part`` into at most ``at_most`` groups."""
    blocks = list(part)

    def rec(i, groups):
        if i == len(blocks):
            yield tuple(sorted(groups))
            return
        for g in range(len(groups)):
            groups[g] |= blocks[i]
            yield from rec(i + 1, groups)
            groups[g] ^= blocks[i]
        if len(groups) < at_most:
            groups.append(blocks[i])
            yield from rec(i + 1, groups)
            groups.pop()

    yield from rec(0, [])


def multi_merge_price_of_hierarchy(space, kind, limit=MULTI_MERGE_LIMIT):
    """Independent oracle: enumerate level-indexed compatible partitions.

    ``H_{i-1}`` ranges over every coarsening of ``H_i`` with at most
    ``i - 1`` blocks, multi-way merges and repeated levels included.
    """
    kind = CostKind.parse(kind)
    n = space.n
    table, opt = _opt_and_table(space, kind, limit)
    memo = {}

    def cost(part):
        return max(float(table[m]) for m in part)

    def best(i, part):
        key = (i, part)
        if key in memo:
            return memo[key]
        here = level_ratio(cost(part), opt[i - 1])
        if i == 1:
            val = here
        else:
            val = max(here, min(best(i - 1, q) for q in _coarsenings(part, i - 1)))
        memo[key] = val
        return val

    return best(n, tuple(1 << p for p in range(n)))
