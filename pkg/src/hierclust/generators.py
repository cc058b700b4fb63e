"""Seeded generators for small test metrics."""

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .metric import FiniteMetricSpace, validate_metric

FAMILIES = ("euclidean", "repaired")


def line_metric(n):
    """Points ``0..n-1`` on a line, ``d(i, j) = |i - j|``."""
    x = np.arange(n, dtype=float)
    return FiniteMetricSpace(np.abs(x[:, None] - x[None, :]))


def uniform_metric(n, value=1.0):
    """All distinct points at distance ``value``."""
    return FiniteMetricSpace(value * (1.0 - np.eye(n)))


def euclidean_metric(n, seed):
    """``n`` points uniform in the unit square with Euclidean distances."""
    pts = np.random.default_rng(seed).random((n, 2))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    return validate_metric(d)


def repaired_metric(n, seed, integer=False):
    """Random symmetric weights closed under shortest paths.

    Off-diagonal weights are uniform on ``[1, 10)`` (integers ``1..10`` with
    ``integer=True``); the shortest-path closure turns them into a metric.
    """
    rng = np.random.default_rng(seed)
    if integer:
        w = rng.integers(1, 11, size=(n, n)).astype(float)
    else:
        w = rng.uniform(1.0, 10.0, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    d = shortest_path(w, method="FW", directed=False)
    return validate_metric(d)


def random_space(family, n, seed):
    if family == "euclidean":
        return euclidean_metric(n, seed)
    if family == "repaired":
        return repaired_metric(n, seed)
    raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")


def battery(n=12, count=100, seed=0):
    """``count`` spaces from each family with seeds ``seed .. seed + count - 1``."""
    return [(fam, s, random_space(fam, n, s))
            for fam in FAMILIES for s in range(seed, seed + count)]
