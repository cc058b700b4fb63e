"""Exact optimal k-clusterings for small instances.

All three objectives take values in a finite set, namely the entries of the
subset cost table.  The optimum for ``k`` blocks is therefore the smallest
table value ``t`` such that the points split into at most ``k`` subsets of
cost at most ``t``.  That count is computed by a subset dynamic program over
bit masks, so the solver is exponential in ``n`` and capped by ``limit``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import IncompleteProfile, InstanceTooLarge, KindMismatch
from .metric import TOL, Clustering, CostKind, cluster_center

DEFAULT_LIMIT = 16


def _check_size(space, limit):
    if space.n > limit:
        raise InstanceTooLarge(space.n, limit)


def subset_costs(space, kind, limit=DEFAULT_LIMIT):
    """Cost of every subset of the points, indexed by bit mask.

    Entry 0 (the empty set) is 0.  Tables are cached on the space.
    """
    kind = CostKind.parse(kind)
    _check_size(space, limit)
    key = ("subset_costs", kind)
    table = space._cache.get(key)
    if table is None:
        if kind is CostKind.DIAMETER:
            table = kernels.diameter_table(space.dist)
        else:
            ecc = kernels.eccentricity_table(space.center_pool)
            table = kernels.center_table(ecc, space.n, kind is CostKind.DISCRETE_RADIUS)
        table.setflags(write=False)
        space._cache[key] = table
    return table


class _Search:
    """Memoised cover counts over the sorted candidate thresholds."""

    def __init__(self, table):
        self.table = table
        self.thresholds = np.unique(table)
        self.full = table.shape[0] - 1
        self._counts = {}
        self._last = (None, None)

    def partition(self, idx):
        if self._last[0] != idx:
            f = kernels.min_partition(self.table <= self.thresholds[idx] + TOL)
            self._last = (idx, f)
        return self._last[1]

    def count(self, idx):
        c = self._counts.get(idx)
        if c is None:
            c = self._counts[idx] = int(self.partition(idx)[self.full])
        return c

    def first_feasible(self, k, lo=0, hi=None):
        """Smallest threshold index in ``[lo, hi]`` covering with ``<= k`` blocks."""
        hi = len(self.thresholds) - 1 if hi is None else hi
        while lo < hi:
            mid = (lo + hi) // 2
            if self.count(mid) <= k:
                hi = mid
            else:
                lo = mid + 1
        return lo


def _bits(mask):
    return tuple(j for j in range(mask.bit_length()) if (mask >> j) & 1)


def _lex_witness(table, f, thr):
    """Lexicographically smallest partition using exactly ``f[full]`` blocks."""
    rem = table.shape[0] - 1
    blocks = []
    while rem:
        low = rem & -rem
        cand = kernels.submasks(rem ^ low) | low
        need = f[rem] - 1
        good = cand[(table[cand] <= thr + TOL) & (f[rem ^ cand] == need)]
        best = min(_bits(int(s)) for s in good)
        blocks.append(best)
        rem ^= sum(1 << p for p in best)
    return blocks


def _pad_to(space, kind, blocks, k):
    """Split elements off blocks until there are exactly ``k`` blocks.

    The element removed is the largest one that is not the block's center,
    so no block cost grows (the discrete radius is not monotone under
    inclusion, but keeping the center makes removal safe).
    """
    blocks = [list(b) for b in blocks]
    while len(blocks) < k:
        j = max(i for i, b in enumerate(blocks) if len(b) > 1)
        block = blocks[j]
        _, center = cluster_center(space, block, kind)
        victim = max(p for p in block if p != center)
        block.remove(victim)
        blocks.append([victim])
    return Clustering(blocks, space.n)


@dataclass(frozen=True)
class OptimalProfile:
    """Optimal (or reference) cost and witness for every ``k`` in ``1..n``.

    ``witnesses`` holds the distinct witness clusterings and ``index[k-1]``
    points at the one used for level ``k``; large reference families share
    a handful of clusterings across many levels.
    """

    kind: CostKind
    n: int
    costs: tuple
    witnesses: tuple
    index: tuple

    def cost(self, k):
        return self.costs[k - 1]

    def witness(self, k):
        return self.witnesses[self.index[k - 1]]

    @classmethod
    def from_levels(cls, kind, costs, witnesses):
        """Build from per-level lists, deduplicating equal witnesses."""
        uniq, pos, index = [], {}, []
        for w in witnesses:
            j = pos.get(w.blocks)
            if j is None:
                j = pos[w.blocks] = len(uniq)
                uniq.append(w)
            index.append(j)
        return cls(CostKind.parse(kind), len(costs), tuple(float(c) for c in costs),
                   tuple(uniq), tuple(index))

    def validate(self, kind=None, n=None):
        if kind is not None and CostKind.parse(kind) is not self.kind:
            raise KindMismatch(f"profile is for {self.kind.value}, expected {CostKind.parse(kind).value}")
        if n is not None and n != self.n:
            raise IncompleteProfile(f"profile covers {self.n} points, expected {n}")
        if len(self.costs) != self.n or len(self.index) != self.n:
            raise IncompleteProfile("profile must list every level 1..n")
        for k in range(1, self.n + 1):
            if len(self.witness(k)) > k:
                raise IncompleteProfile(f"witness for k={k} has too many blocks")
        return self

    def to_dict(self):
        levels = [{"k": k, "cost": self.costs[k - 1], "witness": self.index[k - 1]}
                  for k in range(1, self.n + 1)]
        if len(self.witnesses) == self.n:
            for lv in levels:
                lv["blocks"] = self.witnesses[lv.pop("witness")].to_list()
            return {"cost_kind": self.kind.short, "n": self.n, "levels": levels}
        return {"cost_kind": self.kind.short, "n": self.n,
                "witnesses": [w.to_list() for w in self.witnesses], "levels": levels}

    @classmethod
    def from_dict(cls, data):
        kind = CostKind.parse(data["cost_kind"])
        levels = sorted(data["levels"], key=lambda lv: lv["k"])
        n = data.get("n", len(levels))
        if [lv["k"] for lv in levels] != list(range(1, n + 1)):
            raise IncompleteProfile("profile must list every level 1..n")
        shared = [Clustering(w, n) for w in data.get("witnesses", [])]
        wit = [shared[lv["witness"]] if "witness" in lv else Clustering(lv["blocks"], n)
               for lv in levels]
        return cls.from_levels(kind, [lv["cost"] for lv in levels], wit)


def optimal_cost(space, k, kind, limit=DEFAULT_LIMIT):
    """Minimum cost over partitions into at most ``k`` blocks."""
    kind = CostKind.parse(kind)
    if not 1 <= k <= space.n:
        raise ValueError(f"k must lie in 1..{space.n}")
    search = _Search(subset_costs(space, kind, limit))
    return float(search.thresholds[search.first_feasible(k)])


def optimal_clustering(space, k, kind, limit=DEFAULT_LIMIT):
    """An optimal k-clustering with exactly ``k`` blocks.

    Among partitions at the optimal threshold with the fewest blocks the
    lexicographically smallest one is taken, then padded to ``k`` blocks.
    """
    kind = CostKind.parse(kind)
    if not 1 <= k <= space.n:
        raise ValueError(f"k must lie in 1..{space.n}")
    table = subset_costs(space, kind, limit)
    search = _Search(table)
    idx = search.first_feasible(k)
    return _witness(space, kind, search, idx, k)


def _witness(space, kind, search, idx, k):
    thr = search.thresholds[idx]
    blocks = _lex_witness(search.table, search.partition(idx), thr)
    return _pad_to(space, kind, blocks, k)


def optimal_profile(space, kind, limit=DEFAULT_LIMIT):
    """Optimal costs and witnesses for every level ``k = 1..n``."""
    kind = CostKind.parse(kind)
    n = space.n
    if n == 0:
        return OptimalProfile(kind, 0, (), (), ())
    search = _Search(subset_costs(space, kind, limit))
    level_idx = [0] * (n + 1)

    # the optimal threshold index is nonincreasing in k
    def solve(klo, khi, lo, hi):
        if klo > khi:
            return
        mid = (klo + khi) // 2
        j = search.first_feasible(mid, lo, hi)
        level_idx[mid] = j
        solve(klo, mid - 1, j, hi)
        solve(mid + 1, khi, lo, j)

    solve(1, n, 0, len(search.thresholds) - 1)
    costs, witnesses = [], []
    for k in range(1, n + 1):
        j = level_idx[k]
        costs.append(float(search.thresholds[j]))
        witnesses.append(_witness(space, kind, search, j, k))
    return OptimalProfile.from_levels(kind, costs, witnesses)
