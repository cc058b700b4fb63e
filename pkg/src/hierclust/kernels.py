"""Hot inner loops, in a numba flavour and a pure-numpy flavour.

Every public function here dispatches on :data:`hierclust._backend.BACKEND`.
Both flavours return identical results; ``tests/test_kernels.py`` checks this
and ``benchmarks/bench_kernels.py`` times them against each other.

Subset tables are indexed by bit masks over the ``n`` points (bit ``p`` set
means point ``p`` is in the subset), so they are only usable for small ``n``.
"""

import numpy as np

from ._backend import BACKEND, njit

INF_COUNT = 1 << 30


# ----------------------------------------------------------------------------
# subset cost tables
# ----------------------------------------------------------------------------

@njit
def _eccentricity_table_nb(rows):
    m, n = rows.shape
    out = np.zeros((m, 1 << n))
    for b in range(n):
        lo = 1 << b
        for mask in range(lo, lo << 1):
            prev = mask - lo
            for c in range(m):
                v = rows[c, b]
                o = out[c, prev]
                out[c, mask] = v if v > o else o
    return out


def _eccentricity_table_np(rows):
    m, n = rows.shape
    out = np.zeros((m, 1 << n))
    for b in range(n):
        lo = 1 << b
        np.maximum(out[:, :lo], rows[:, b:b + 1], out=out[:, lo:lo << 1])
    return out


@njit
def _diameter_table_nb(dist):
    n = dist.shape[0]
    out = np.zeros(1 << n)
    for b in range(n):
        lo = 1 << b
        for mask in range(lo, lo << 1):
            prev = mask - lo
            best = out[prev]
            for j in range(b):
                if (prev >> j) & 1:
                    v = dist[b, j]
                    if v > best:
                        best = v
            out[mask] = best
    return out


def _diameter_table_np(dist):
    n = dist.shape[0]
    ecc = _eccentricity_table_np(dist)
    out = np.zeros(1 << n)
    for b in range(n):
        lo = 1 << b
        np.maximum(out[:lo], ecc[b, :lo], out=out[lo:lo << 1])
    return out


@njit
def _center_table_nb(ecc, n, members_only):
    m, size = ecc.shape
    out = np.zeros(size)
    for mask in range(1, size):
        best = np.inf
        top = n if members_only else m
        for c in range(top):
            if members_only and not ((mask >> c) & 1):
                continue
            v = ecc[c, mask]
            if v < best:
                best = v
        out[mask] = best
    return out


def _center_table_np(ecc, n, members_only):
    if not members_only:
        out = ecc.min(axis=0)
    else:
        masks = np.arange(ecc.shape[1])
        member = ((masks[None, :] >> np.arange(n)[:, None]) & 1).astype(bool)
        out = np.where(member, ecc[:n], np.inf).min(axis=0)
    out[0] = 0.0
    return out


def eccentricity_table(rows):
    """``out[c, mask] = max(rows[c, p] for p in mask)``; 0 for the empty mask."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if BACKEND == "numba":
        return _eccentricity_table_nb(rows)
    return _eccentricity_table_np(rows)


def diameter_table(dist):
    """Diameter of every subset of the points, indexed by bit mask."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if BACKEND == "numba":
        return _diameter_table_nb(dist)
    return _diameter_table_np(dist)


def center_table(ecc, n, members_only):
    """Best-center radius of every subset.

    ``ecc`` rows ``0..n-1`` must belong to the clusterable points themselves;
    further rows are external centers.  With ``members_only`` the center must
    lie in the subset (discrete radius), otherwise any row may serve.
    """
    ecc = np.ascontiguousarray(ecc, dtype=np.float64)
    if BACKEND == "numba":
        return _center_table_nb(ecc, n, members_only)
    return _center_table_np(ecc, n, members_only)


# ----------------------------------------------------------------------------
# minimum partition into admissible blocks
# ----------------------------------------------------------------------------

@njit
def _min_partition_nb(ok):
    size = ok.shape[0]
    f = np.full(size, INF_COUNT, np.int64)
    f[0] = 0
    for mask in range(1, size):
        low = mask & (-mask)
        rest = mask ^ low
        best = INF_COUNT
        s = rest
        while True:
            block = s | low
            if ok[block]:
                v = f[mask ^ block] + 1
                if v < best:
                    best = v
            if s == 0:
                break
            s = (s - 1) & rest
        f[mask] = best
    return f


def submasks(free):
    """All submasks of ``free`` as an int64 array (increasing order)."""
    bits = [1 << j for j in range(int(free).bit_length()) if (free >> j) & 1]
    if not bits:
        return np.zeros(1, dtype=np.int64)
    sel = (np.arange(1 << len(bits))[:, None] >> np.arange(len(bits))) & 1
    return sel @ np.asarray(bits, dtype=np.int64)


def _min_partition_np(ok):
    size = ok.shape[0]
    n = size.bit_length() - 1
    full = size - 1
    f = np.full(size, INF_COUNT, np.int64)
    f[0] = 0
    idx = np.flatnonzero(ok)
    idx = idx[idx > 0]
    low = idx & -idx
    # masks whose lowest bit is b only depend on masks above b
    for b in range(n - 1, -1, -1):
        above = full & ~((1 << (b + 1)) - 1)
        for block in idx[low == (1 << b)]:
            rest = submasks(above & ~int(block))
            tgt = rest | int(block)
            f[tgt] = np.minimum(f[tgt], f[rest] + 1)
    return f


def min_partition(ok):
    """Fewest admissible blocks partitioning each subset.

    ``ok[mask]`` marks admissible blocks.  Returns ``f`` with ``f[mask]`` the
    minimum number of pairwise disjoint admissible blocks whose union is
    ``mask`` (``INF_COUNT`` when impossible).
    """
    ok = np.ascontiguousarray(ok, dtype=np.bool_)
    if BACKEND == "numba":
        return _min_partition_nb(ok)
    return _min_partition_np(ok)


# ----------------------------------------------------------------------------
# farthest-first traversal
# ----------------------------------------------------------------------------

@njit
def _gonzales_nb(dist, start, priority, tol):
    n = dist.shape[0]
    order = np.empty(n, np.int64)
    radii = np.empty(n)
    used = np.zeros(n, np.bool_)
    mind = dist[start].copy()
    order[0] = start
    radii[0] = np.inf
    used[start] = True
    for k in range(1, n):
        best = -1.0
        for x in range(n):
            if not used[x] and mind[x] > best:
                best = mind[x]
        pick = -1
        for x in range(n):
            if not used[x] and mind[x] >= best - tol:
                if pick == -1 or priority[x] < priority[pick]:
                    pick = x
        order[k] = pick
        radii[k] = mind[pick]
        used[pick] = True
        for x in range(n):
            d = dist[pick, x]
            if d < mind[x]:
                mind[x] = d
    return order, radii


def _gonzales_np(dist, start, priority, tol):
    n = dist.shape[0]
    order = np.empty(n, np.int64)
    radii = np.empty(n)
    mind = dist[start].copy()
    mind[start] = -np.inf
    order[0], radii[0] = start, np.inf
    for k in range(1, n):
        best = mind.max()
        tied = np.flatnonzero(mind >= best - tol)
        pick = tied[np.argmin(priority[tied])]
        order[k], radii[k] = pick, mind[pick]
        np.minimum(mind, dist[pick], out=mind)
        mind[order[:k + 1]] = -np.inf
    return order, radii


def gonzales(dist, start, priority=None, tol=1e-9):
    """Farthest-first order and insertion radii (``radii[0] = inf``)."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if priority is None:
        priority = np.arange(n, dtype=np.int64)
    priority = np.ascontiguousarray(priority, dtype=np.int64)
    if BACKEND == "numba":
        return _gonzales_nb(dist, int(start), priority, float(tol))
    return _gonzales_np(dist, int(start), priority, float(tol))


# ----------------------------------------------------------------------------
# complete linkage under the diameter objective
# ----------------------------------------------------------------------------
# Slots double as cluster representatives: a merge always keeps the smaller
# slot, which is then the smallest point in the cluster.  Pair keys are
# (merged diameter, smaller slot, larger slot), compared lexicographically.

@njit
def _key_less(c1, a1, b1, c2, a2, b2):
    if c1 != c2:
        return c1 < c2
    if a1 != a2:
        return a1 < a2
    return b1 < b2


@njit
def _refresh_row(x, D, diam, active, nnv, nni):
    n = D.shape[0]
    bv = np.inf
    bi = -1
    for y in range(n):
        if y == x or not active[y]:
            continue
        v = D[x, y]
        if diam[x] > v:
            v = diam[x]
        if diam[y] > v:
            v = diam[y]
        if bi == -1 or _key_less(v, min(x, y), max(x, y), bv, min(x, bi), max(x, bi)):
            bv = v
            bi = y
    nnv[x] = bv
    nni[x] = bi


@njit
def _complete_linkage_nb(dist):
    n = dist.shape[0]
    D = dist.copy()
    diam = np.zeros(n)
    active = np.ones(n, np.bool_)
    nnv = np.full(n, np.inf)
    nni = np.full(n, -1, np.int64)
    out = np.empty((max(n - 1, 0), 2), np.int64)
    costs = np.empty(max(n - 1, 0))
    for x in range(n):
        _refresh_row(x, D, diam, active, nnv, nni)
    for step in range(n - 1):
        bx = -1
        for x in range(n):
            if not active[x] or nni[x] < 0:
                continue
            if bx == -1 or _key_less(nnv[x], min(x, nni[x]), max(x, nni[x]),
                                     nnv[bx], min(bx, nni[bx]), max(bx, nni[bx])):
                bx = x
        y = nni[bx]
        a = min(bx, y)
        b = max(bx, y)
        c = nnv[bx]
        out[step, 0] = a
        out[step, 1] = b
        costs[step] = c
        active[b] = False
        for x in range(n):
            if active[x] and x != a:
                v = D[a, x] if D[a, x] > D[b, x] else D[b, x]
                D[a, x] = v
                D[x, a] = v
        diam[a] = c
        _refresh_row(a, D, diam, active, nnv, nni)
        for x in range(n):
            if not active[x] or x == a:
                continue
            if nni[x] == a or nni[x] == b:
                _refresh_row(x, D, diam, active, nnv, nni)
            else:
                v = D[x, a]
                if diam[x] > v:
                    v = diam[x]
                if diam[a] > v:
                    v = diam[a]
                if _key_less(v, min(x, a), max(x, a), nnv[x], min(x, nni[x]), max(x, nni[x])):
                    nnv[x] = v
                    nni[x] = a
    return out, costs


def _complete_linkage_np(dist):
    n = dist.shape[0]
    D = dist.copy()
    diam = np.zeros(n)
    active = np.ones(n, dtype=bool)
    slots = np.arange(n)
    nnv = np.full(n, np.inf)
    nni = np.full(n, -1)

    def refresh(x):
        cand = slots[active & (slots != x)]
        if cand.size == 0:
            nnv[x], nni[x] = np.inf, -1
            return
        v = np.maximum(np.maximum(D[x, cand], diam[cand]), diam[x])
        lo, hi = np.minimum(cand, x), np.maximum(cand, x)
        j = np.lexsort((hi, lo, v))[0]
        nnv[x], nni[x] = v[j], cand[j]

    for x in range(n):
        refresh(x)
    out = np.empty((max(n - 1, 0), 2), np.int64)
    costs = np.empty(max(n - 1, 0))
    for step in range(n - 1):
        live = slots[active & (nni >= 0)]
        lo = np.minimum(live, nni[live])
        hi = np.maximum(live, nni[live])
        j = np.lexsort((hi, lo, nnv[live]))[0]
        a, b, c = lo[j], hi[j], nnv[live[j]]
        out[step] = a, b
        costs[step] = c
        active[b] = False
        merged = np.maximum(D[a], D[b])
        D[a, :] = merged
        D[:, a] = merged
        diam[a] = c
        refresh(a)
        others = slots[active & (slots != a)]
        stale = others[(nni[others] == a) | (nni[others] == b)]
        for x in stale:
            refresh(x)
        rest = others[(nni[others] != a) & (nni[others] != b)]
        if rest.size:
            v = np.maximum(np.maximum(D[rest, a], diam[rest]), diam[a])
            cur_lo = np.minimum(rest, nni[rest])
            cur_hi = np.maximum(rest, nni[rest])
            new_lo = np.minimum(rest, a)
            new_hi = np.maximum(rest, a)
            better = (v < nnv[rest]) | ((v == nnv[rest]) & (
                (new_lo < cur_lo) | ((new_lo == cur_lo) & (new_hi < cur_hi))))
            upd = rest[better]
            nnv[upd] = v[better]
            nni[upd] = a
    return out, costs


def complete_linkage_diameter(dist):
    """Greedy merge order minimising the merged diameter.

    Returns ``(pairs, costs)``: row ``s`` of ``pairs`` holds the two slots
    merged at step ``s`` (the result keeps the smaller slot) and ``costs[s]``
    is the diameter of the merged cluster.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if BACKEND == "numba":
        return _complete_linkage_nb(dist)
    return _complete_linkage_np(dist)


# ----------------------------------------------------------------------------
# triangle inequality scan
# ----------------------------------------------------------------------------

@njit(fastmath=True)
def _triangle_slack_nb(dist):
    # min over i, j, k of d(i,j) + d(j,k) - d(i,k); contiguous inner loop
    n = dist.shape[0]
    acc = np.zeros(n)
    for i in range(n):
        di = dist[i]
        for j in range(n):
            dij = di[j]
            dj = dist[j]
            for k in range(n):
                g = dij + dj[k] - di[k]
                if g < acc[k]:
                    acc[k] = g
    return acc.min() if n else 0.0


@njit
def _first_triangle_violation_nb(dist, tol):
    if _triangle_slack_nb(dist) >= -tol:
        return -1, -1, -1
    n = dist.shape[0]
    for i in range(n):
        for k in range(i + 1, n):
            lim = dist[i, k] - tol
            for j in range(n):
                if dist[i, j] + dist[j, k] < lim:
                    return i, j, k
    return -1, -1, -1


def _first_triangle_violation_np(dist, tol):
    n = dist.shape[0]
    for i in range(n):
        # via[j, k] = d(i, j) + d(j, k)
        best = (dist[i][:, None] + dist).min(axis=0)
        bad = np.flatnonzero(best[i + 1:] < dist[i, i + 1:] - tol)
        if bad.size:
            k = i + 1 + bad[0]
            j = int(np.flatnonzero(dist[i] + dist[:, k] < dist[i, k] - tol)[0])
            return i, j, int(k)
    return -1, -1, -1


def first_triangle_violation(dist, tol=1e-9):
    """First ``(i, j, k)`` with ``i < k`` and ``d(i,k) > d(i,j) + d(j,k) + tol``.

    Scans ``(i, k)`` lexicographically, then ``j``.  Returns ``None`` when the
    matrix satisfies the triangle inequality.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if BACKEND == "numba":
        out = _first_triangle_violation_nb(dist, float(tol))
    else:
        out = _first_triangle_violation_np(dist, float(tol))
    return None if out[0] < 0 else tuple(int(v) for v in out)


@njit(fastmath=True)
def _candidate_slack_nb(dist, v):
    n = dist.shape[0]
    acc = np.zeros(n)
    for p in range(n):
        vp = v[p]
        dp = dist[p]
        for q in range(n):
            g = min(vp + v[q] - dp[q], dp[q] + v[q] - vp)
            if g < acc[q]:
                acc[q] = g
    return acc.min() if n else 0.0


@njit
def _first_candidate_violation_nb(dist, cand, tol):
    m, n = cand.shape
    for r in range(m):
        if _candidate_slack_nb(dist, cand[r]) >= -tol:
            continue
        v = cand[r]
        for p in range(n):
            for q in range(n):
                if v[p] + v[q] < dist[p, q] - tol:
                    return r, p, q, 0
        for p in range(n):
            for q in range(n):
                if dist[p, q] + v[q] < v[p] - tol:
                    return r, p, q, 1
    return -1, -1, -1, -1


def _first_candidate_violation_np(dist, cand, tol):
    for r, v in enumerate(cand):
        for case, gap in enumerate((v[:, None] + v[None, :] - dist,
                                    dist + v[None, :] - v[:, None])):
            bad = np.argwhere(gap < -tol)
            if bad.size:
                return r, int(bad[0, 0]), int(bad[0, 1]), case
    return -1, -1, -1, -1


def first_candidate_violation(dist, cand, tol=1e-9):
    """First candidate row breaking the triangle inequality with the points.

    Returns ``(row, p, q, case)`` or ``None``.  Case 0 means
    ``d(p, q) > c(p) + c(q)``; case 1 means ``c(p) > d(p, q) + c(q)``.
    Rows are scanned in order and, within a row, case 0 before case 1.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    cand = np.ascontiguousarray(cand, dtype=np.float64)
    if BACKEND == "numba":
        out = _first_candidate_violation_nb(dist, cand, float(tol))
    else:
        out = _first_candidate_violation_np(dist, cand, float(tol))
    return None if out[0] < 0 else tuple(int(v) for v in out)
