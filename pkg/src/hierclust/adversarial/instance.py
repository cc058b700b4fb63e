"""The layered matrix-point instance, its shortest-path metric and its
canonical clusterings.

Points are matrices whose row ``l`` (``l >= 1``) has ``N_{l-1}`` entries in
``range(Gamma * N_{l-1})``; row 0 is a single fixed entry.  A point is
stored as its mixed-radix index with row 0 most significant and, inside a
row, the first entry most significant.  The index is therefore the
lexicographic rank, and the rank of the prefix made of rows ``0..l`` is
``index // (N_k / N_l)``.

Hyperedge family ``A_l`` groups points that agree everywhere except in the
row-``l`` entry selected by the rank of their rows ``0..l-1``; it has weight
``l``.  Each block ``A`` also gets a Steiner vertex joined to its members
by edges of weight ``l / 2``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from ..errors import DepthTooLarge
from ..exact import OptimalProfile
from ..metric import Clustering, CostKind, FiniteMetricSpace, clustering_cost, validate_metric

MAX_DEPTH = 2


def level_sizes(k):
    """``N_0 .. N_k`` for depth ``k``."""
    gamma = k + 1
    sizes = [1]
    for _ in range(k):
        prev = sizes[-1]
        sizes.append(prev * (gamma * prev) ** prev)
    return sizes


@dataclass
class AdversarialInstance:
    """Combinatorial data of the construction for a fixed depth ``k``.

    Attributes
    ----------
    N : list of int
        ``N_0 .. N_k``.
    radices : ndarray
        Radix of every matrix entry, row 0 first.
    row_of : ndarray
        Row of every matrix entry.
    weights : ndarray
        Positional weight of every entry in the point index.
    edge_labels : list of ndarray
        ``edge_labels[l][p]`` identifies the block of ``A_l`` holding ``p``
        (``l = 0`` gives the singletons).
    """

    k: int
    gamma: int
    N: list
    radices: np.ndarray
    row_of: np.ndarray
    weights: np.ndarray
    edge_labels: list = field(repr=False)

    @property
    def n(self):
        return self.N[-1]

    def stride(self, level):
        """``N_k / N_level``: number of suffix values below a prefix of rows ``0..level``."""
        return self.N[-1] // self.N[level]

    def phi(self, level, points):
        """Rank of the prefix made of rows ``0..level``."""
        return np.asarray(points) // self.stride(level)

    def digits(self, points):
        """Matrix entries of the given points, one row per point."""
        pts = np.asarray(points, dtype=np.int64).reshape(-1)
        return (pts[:, None] // self.weights[None, :]) % self.radices[None, :]

    def entry(self, row, s):
        """Flat position of entry ``s`` (0-based) of ``row``."""
        return int(np.flatnonzero(self.row_of == row)[s])

    def with_prefix(self, points, level, rank):
        """Points with rows ``0..level`` replaced by the prefix of rank ``rank``."""
        st = self.stride(level)
        return rank * st + np.asarray(points) % st

    def component_labels(self, level):
        """Connected component of every point in ``G_level``: points that
        share rows ``level+1..k``."""
        return np.arange(self.n) % self.stride(level)

    def blocks(self, level):
        """``A_level`` as a :class:`Clustering`."""
        return Clustering.from_labels(self.edge_labels[level])

    def block_count(self, level):
        return self.n // (self.gamma * self.N[level - 1])

    def to_sidecar(self):
        """JSON-ready description of the combinatorial data."""
        return {
            "k": self.k,
            "Gamma": self.gamma,
            "N": list(self.N),
            "encodings": self.digits(np.arange(self.n)).tolist(),
            "phi": {str(l): self.phi(l, np.arange(self.n)).tolist() for l in range(self.k + 1)},
            "hyperedges": {str(l): self.edge_labels[l].tolist() for l in range(1, self.k + 1)},
        }


def build_instance(k, max_depth=MAX_DEPTH):
    """Enumerate the points, hyperedge families and prefix ranks for depth ``k``."""
    if k < 1:
        raise ValueError("depth must be at least 1")
    if k > max_depth:
        raise DepthTooLarge(f"depth {k} exceeds the limit {max_depth}")
    gamma = k + 1
    N = level_sizes(k)
    radices, rows = [1], [0]
    for l in range(1, k + 1):
        radices += [gamma * N[l - 1]] * N[l - 1]
        rows += [l] * N[l - 1]
    radices = np.array(radices, dtype=np.int64)
    rows = np.array(rows, dtype=np.int64)
    weights = np.ones_like(radices)
    for j in range(len(radices) - 2, -1, -1):
        weights[j] = weights[j + 1] * radices[j + 1]
    n = N[-1]
    assert int(np.prod(radices)) == n
    pts = np.arange(n, dtype=np.int64)

    labels = [pts.copy()]
    for l in range(1, k + 1):
        # position of the free entry: rank of rows 0..l-1 indexes into row l
        first = int(np.flatnonzero(rows == l)[0])
        m = pts // (n // N[l - 1])
        w = weights[first + m]
        digit = (pts // w) % radices[first]
        labels.append(pts - digit * w)
    inst = AdversarialInstance(k, gamma, N, radices, rows, weights, labels)
    return inst


def _hyperedge_graph(inst, levels, steiner=False):
    """Sparse edge list over points (and Steiner vertices when requested).

    Without Steiner vertices each block becomes a clique of weight ``l``;
    with them each block becomes a star of weight ``l / 2`` around its own
    vertex.  Zero-weight ``A_0`` stars are left out (they only duplicate a
    point), and cliques and stars are never mixed.
    """
    n = inst.n
    rows, cols, vals = [], [], []
    extra = 0
    for l in levels:
        if l == 0:
            continue
        lab = inst.edge_labels[l]
        order = np.argsort(lab, kind="stable")
        size = inst.gamma * inst.N[l - 1]
        groups = order.reshape(-1, size)
        if steiner:
            hub = n + extra + np.repeat(np.arange(groups.shape[0]), size)
            rows.append(groups.reshape(-1))
            cols.append(hub)
            vals.append(np.full(hub.size, l / 2.0))
            extra += groups.shape[0]
        else:
            a, b = np.triu_indices(size, 1)
            rows.append(groups[:, a].reshape(-1))
            cols.append(groups[:, b].reshape(-1))
            vals.append(np.full(groups.shape[0] * a.size, float(l)))
    total = n + extra
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0)
    return coo_matrix((v, (r, c)), shape=(total, total)).tocsr()


def graph_components(inst, level):
    """Component labels of ``G_level`` computed by graph search."""
    graph = _hyperedge_graph(inst, range(level + 1))
    _, lab = connected_components(graph, directed=False)
    return lab


def point_distances(inst):
    """All-pairs shortest paths among points on the clique-expanded graph."""
    graph = _hyperedge_graph(inst, range(1, inst.k + 1))
    return dijkstra(graph, directed=False)


def steiner_distances(inst, chunk=512):
    """Shortest paths on the Steiner-augmented graph.

    Returns ``(point_rows, steiner_rows)``: distances from every point and
    from every Steiner vertex of ``A_1 .. A_k`` to every point.
    """
    n = inst.n
    graph = _hyperedge_graph(inst, range(1, inst.k + 1), steiner=True)
    total = graph.shape[0]
    out = np.empty((total, n))
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total))
        out[idx] = dijkstra(graph, directed=False, indices=idx)[:, :n]
    return out[:n], out[n:]


def steiner_labels(inst):
    names = [f"v_A0_{p}" for p in range(inst.n)]
    for l in range(1, inst.k + 1):
        names += [f"v_A{l}_{j}" for j in range(inst.block_count(l))]
    return names


def instance_metric(inst, validate=False):
    """Metric space of the instance with Steiner vertices as center candidates.

    Point distances come from the clique expansion.  Candidate rows come
    from the Steiner-augmented graph; the ``A_0`` Steiner vertices sit at
    distance 0 from their point and simply copy its row.  The construction
    is a metric by design, so the cubic axiom check is opt-in.
    """
    dist = point_distances(inst)
    _, star = steiner_distances(inst)
    centers = np.vstack([dist, star])
    labels = [f"p{p}" for p in range(inst.n)]
    if validate:
        return validate_metric(dist, centers, labels, steiner_labels(inst))
    return FiniteMetricSpace(dist, centers, labels, steiner_labels(inst))


def components(inst, level):
    """Connected components of ``G_level`` as a :class:`Clustering`."""
    if not 0 <= level <= inst.k:
        raise ValueError(f"level must lie in 0..{inst.k}")
    return Clustering.from_labels(inst.component_labels(level))


def canonical_partition(inst, level):
    """The hyperedge family ``A_level`` (``1 <= level <= k``)."""
    if not 1 <= level <= inst.k:
        raise ValueError(f"level must lie in 1..{inst.k}")
    return inst.blocks(level)


def canonical_cost(level, kind):
    """Cost of ``A_level``: ``level`` (diameter and discrete radius) or ``level / 2``."""
    kind = CostKind.parse(kind)
    return level / 2 if kind is CostKind.RADIUS else float(level)


def cost_floor(inst, cluster_count, kind):
    """Lower bound on the cost of any clustering with ``cluster_count`` blocks.

    The largest ``l`` with ``cluster_count < N_k / N_{l-1}`` gives ``l``
    (halved for the radius); 0 when there is none.
    """
    if not 1 <= cluster_count <= inst.n:
        raise ValueError(f"cluster count must lie in 1..{inst.n}")
    best = 0
    for l in range(1, inst.k + 1):
        if cluster_count < inst.n // inst.N[l - 1]:
            best = l
    return canonical_cost(best, kind)


def canonical_profile(inst, space, kind):
    """Reference family for every level: singletons at ``N_k``, then the
    largest ``A_l`` that fits, then one block.  Costs are measured."""
    kind = CostKind.parse(kind)
    n = inst.n
    fams = [(inst.block_count(l), canonical_partition(inst, l)) for l in range(1, inst.k + 1)]
    whole = Clustering.whole(n)
    single = Clustering.singletons(n)
    measured = {id(c): clustering_cost(space, c, kind) for _, c in fams}
    measured[id(whole)] = clustering_cost(space, whole, kind)
    measured[id(single)] = 0.0
    costs, wits = [], []
    for count in range(1, n + 1):
        if count == n:
            pick = single
        else:
            fitting = [c for size, c in fams if size <= count]
            pick = max(fitting, key=len) if fitting else whole
        costs.append(measured[id(pick)])
        wits.append(pick)
    return OptimalProfile.from_levels(kind, costs, wits)
