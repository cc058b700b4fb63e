"""Finite metric spaces, clusterings and the three clustering objectives.

A :class:`FiniteMetricSpace` holds ``n`` clusterable points plus an optional
list of external center candidates.  Each candidate is described only by its
distance row to the clusterable points.

Radius centers may be any clusterable point or any candidate.  The discrete
radius restricts the center to the cluster itself.
"""

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import (
    AsymmetricMatrix,
    EmptyCluster,
    GroundSetMismatch,
    MetricError,
    NonpositiveFactor,
    NonpositiveOffDiagonal,
    NonzeroDiagonal,
    TriangleViolation,
)

TOL = 1e-9


class CostKind(str, Enum):
    DIAMETER = "diameter"
    RADIUS = "radius"
    DISCRETE_RADIUS = "discrete_radius"

    @classmethod
    def parse(cls, value):
        """Accept enum members, full names, or the short forms diam/rad/drad."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"diam": cls.DIAMETER, "rad": cls.RADIUS, "drad": cls.DISCRETE_RADIUS}
        if key in aliases:
            return aliases[key]
        return cls(key)

    @property
    def short(self):
        return {"diameter": "diam", "radius": "rad", "discrete_radius": "drad"}[self.value]


@dataclass(frozen=True)
class Clustering:
    """A partition of ``range(n)`` stored in canonical form.

    Blocks are sorted tuples and the block list is sorted by first element,
    which coincides with lexicographic order of the block signatures.
    """

    n: int
    blocks: tuple

    def __init__(self, blocks, n=None):
        canon = sorted(tuple(sorted(int(p) for p in b)) for b in blocks)
        if any(len(b) == 0 for b in canon):
            raise EmptyCluster("clustering contains an empty block")
        flat = [p for b in canon for p in b]
        size = len(flat) if n is None else int(n)
        if len(flat) != size or sorted(flat) != list(range(size)):
            raise GroundSetMismatch(f"blocks do not partition range({size})")
        object.__setattr__(self, "n", size)
        object.__setattr__(self, "blocks", tuple(canon))

    @classmethod
    def singletons(cls, n):
        return cls([(p,) for p in range(n)], n)

    @classmethod
    def whole(cls, n):
        return cls([tuple(range(n))], n) if n else cls([], 0)

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels)
        groups = {}
        for p, lab in enumerate(labels.tolist()):
            groups.setdefault(lab, []).append(p)
        return cls(groups.values(), len(labels))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def labels(self):
        """Block index of every point (blocks in canonical order)."""
        out = np.empty(self.n, dtype=np.int64)
        for b, block in enumerate(self.blocks):
            out[list(block)] = b
        return out

    def masks(self):
        """Bit mask of every block (small ``n`` only)."""
        return [sum(1 << p for p in b) for b in self.blocks]

    def to_list(self):
        return [list(b) for b in self.blocks]


class FiniteMetricSpace:
    """Validated distances over clusterable points plus optional candidates.

    Use :func:`validate_metric` to build one from raw input.  Arrays are
    stored read-only so that a space can be shared freely.

    Attributes
    ----------
    dist : ndarray, shape (n, n)
    centers : ndarray, shape (m, n)
        Distance rows of the external center candidates (``m`` may be 0).
    labels, center_labels : list
    """

    def __init__(self, dist, centers=None, labels=None, center_labels=None):
        dist = np.array(dist, dtype=np.float64)
        n = dist.shape[0]
        if centers is None:
            centers = np.zeros((0, n))
        centers = np.array(centers, dtype=np.float64).reshape(-1, n)
        dist.setflags(write=False)
        centers.setflags(write=False)
        self.dist = dist
        self.centers = centers
        self.labels = list(range(n)) if labels is None else list(labels)
        m = centers.shape[0]
        self.center_labels = [f"c{j}" for j in range(m)] if center_labels is None else list(center_labels)
        self._cache = {}

    @property
    def n(self):
        return self.dist.shape[0]

    @property
    def has_candidates(self):
        return self.centers.shape[0] > 0

    @property
    def center_pool(self):
        """Rows of every admissible radius center: points first, then candidates."""
        pool = self._cache.get("pool")
        if pool is None:
            pool = np.vstack([self.dist, self.centers]) if self.has_candidates else self.dist
            self._cache["pool"] = pool
        return pool

    def min_distance(self):
        if self.n < 2:
            return np.inf
        return float(self.dist[~np.eye(self.n, dtype=bool)].min())

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n}, candidates={self.centers.shape[0]})"

    def __eq__(self, other):
        return (isinstance(other, FiniteMetricSpace)
                and np.array_equal(self.dist, other.dist)
                and np.array_equal(self.centers, other.centers))

    __hash__ = None


def validate_metric(raw_matrix, candidates=None, labels=None, center_labels=None, tol=TOL):
    """Check the metric axioms and wrap the input as a :class:`FiniteMetricSpace`.

    Parameters
    ----------
    raw_matrix : array_like, shape (n, n)
    candidates : array_like, shape (m, n), optional
        Distance rows of external center candidates.
    tol : float
        Absolute tolerance for symmetry and the triangle inequality.

    Raises
    ------
    AsymmetricMatrix, NonzeroDiagonal, NonpositiveOffDiagonal, TriangleViolation
        The first violated axiom, in that order of checking.
    """
    d = np.asarray(raw_matrix, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricError(f"distance matrix must be square, got shape {d.shape}")
    if not np.isfinite(d).all():
        raise MetricError("distance matrix has non-finite entries")
    n = d.shape[0]

    asym = np.argwhere(np.abs(d - d.T) > tol)
    if asym.size:
        i, j = sorted(asym[0].tolist())
        raise AsymmetricMatrix(i, j)
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        raise NonzeroDiagonal(int(diag[0]))
    off = np.argwhere((d <= 0) & ~np.eye(n, dtype=bool))
    if off.size:
        i, j = sorted(off[0].tolist())
        raise NonpositiveOffDiagonal(i, j)
    d = (d + d.T) / 2
    bad = kernels.first_triangle_violation(d, tol)
    if bad is not None:
        raise TriangleViolation(*bad)

    if candidates is not None:
        c = np.asarray(candidates, dtype=np.float64).reshape(-1, n)
        if not np.isfinite(c).all() or (c < 0).any():
            raise MetricError("center candidate rows must be finite and nonnegative")
        bad = kernels.first_candidate_violation(d, c, tol)
        if bad is not None:
            row, p, q, case = bad
            if case == 0:
                raise TriangleViolation(p, n + row, q)
            raise TriangleViolation(n + row, q, p)
        candidates = c
    return FiniteMetricSpace(d, candidates, labels, center_labels)


def _members(space, cluster):
    idx = np.asarray(sorted(cluster), dtype=np.int64)
    if idx.size == 0:
        raise EmptyCluster("cost of an empty cluster is undefined")
    if idx[0] < 0 or idx[-1] >= space.n:
        raise IndexError(f"cluster index out of range for n={space.n}")
    return idx


def cluster_center(space, cluster, kind):
    """Cost of ``cluster`` together with its smallest-index optimal center.

    Returns ``(cost, center)``.  For the discrete radius ``center`` is a point
    index; for the radius it indexes :attr:`FiniteMetricSpace.center_pool`
    (values ``>= n`` are candidates).  The diameter has no center and
    returns ``None``.
    """
    kind = CostKind.parse(kind)
    idx = _members(space, cluster)
    if kind is CostKind.DIAMETER:
        return float(space.dist[np.ix_(idx, idx)].max()), None
    if kind is CostKind.DISCRETE_RADIUS:
        ecc = space.dist[np.ix_(idx, idx)].max(axis=1)
        best = ecc.min()
        return float(best), int(idx[np.flatnonzero(ecc <= best + TOL)[0]])
    ecc = space.center_pool[:, idx].max(axis=1)
    best = ecc.min()
    return float(best), int(np.flatnonzero(ecc <= best + TOL)[0])


def cluster_cost(space, cluster, kind):
    """Diameter, radius or discrete radius of one nonempty cluster."""
    kind = CostKind.parse(kind)
    idx = _members(space, cluster)
    if kind is CostKind.DIAMETER:
        return float(space.dist[np.ix_(idx, idx)].max())
    if kind is CostKind.DISCRETE_RADIUS:
        return float(space.dist[np.ix_(idx, idx)].max(axis=1).min())
    return float(space.center_pool[:, idx].max(axis=1).min())


def clustering_cost(space, clustering, kind):
    """Largest cluster cost over the blocks of ``clustering``."""
    blocks = clustering.blocks if isinstance(clustering, Clustering) else clustering
    if not blocks:
        return 0.0
    return max(cluster_cost(space, b, kind) for b in blocks)


def scale_metric(space, factor):
    """Multiply every distance, candidate rows included, by ``factor``."""
    if not factor > 0:
        raise NonpositiveFactor(f"scale factor must be positive, got {factor}")
    return FiniteMetricSpace(space.dist * factor, space.centers * factor,
                             space.labels, space.center_labels)


def space_to_dict(space):
    centers = None
    if space.has_candidates:
        centers = {"labels": list(space.center_labels), "rows": space.centers.tolist()}
    return {"labels": list(space.labels), "matrix": space.dist.tolist(), "centers": centers}


def space_from_dict(data):
    centers = data.get("centers")
    rows = labels = None
    if centers:
        rows, labels = centers["rows"], centers.get("labels")
    return validate_metric(data["matrix"], rows, data.get("labels"), labels)


def save_space(space, path, extra=None):
    payload = space_to_dict(space)
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_space(path):
    with open(path, encoding="utf-8") as fh:
        return space_from_dict(json.load(fh))
