"""Anchor sequences and the recurrence bounding how long they can grow.

An anchor sequence ``l_0 = 0 < l_1 < ... < l_s`` certifies a ratio of at
least ``(l_t + delta * sum(l_0..l_{t-1})) / (l_{t-1} + 1)`` for every
``t``, with ``delta = 2`` for diameter and radius and ``delta = 1`` for the
discrete radius.  Keeping every term at most ``alpha`` and taking each
inequality with equality gives a linear recurrence whose characteristic
roots are complex once ``alpha`` is below the critical value, so any
sequence eventually turns negative.  The step at which that happens caps
the largest depth ``k`` for which ratio ``alpha`` is attainable.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BadSequence, EpsilonOutOfRange

GRID_POINTS = 10_000
MAX_LENGTH = 64
MAX_STEPS = 1_000_000

VARIANTS = {1: 1, 2: 2}
CRITICAL = {1: 4.0, 2: 3 + 2 * math.sqrt(2)}


def analyze_sequence(values, variant=2):
    """Largest certified ratio along a sequence.

    ``variant`` is the weight of the prefix sum (1 for the discrete radius,
    2 for diameter and radius).

    Returns
    -------
    ratio : float
    t : int
        First index attaining the maximum.
    """
    delta = _delta(variant)
    seq = [float(v) for v in values]
    if len(seq) < 2:
        raise BadSequence("need at least two terms")
    if seq[0] != 0:
        raise BadSequence("first term must be 0")
    if any(v < 0 for v in seq):
        raise BadSequence("terms must be nonnegative")
    best, arg = -math.inf, 1
    prefix = seq[0]
    for t in range(1, len(seq)):
        r = (seq[t] + delta * prefix) / (seq[t - 1] + 1)
        if r > best:
            best, arg = r, t
        prefix += seq[t]
    return best, arg


def _delta(variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be 1 or 2, got {variant}")
    return VARIANTS[variant]


def discriminant(alpha, delta):
    """Discriminant of ``X^2 - (alpha - delta + 1) X + alpha``."""
    b = alpha - delta + 1
    return b * b - 4 * alpha


def roots(alpha, delta):
    """The two characteristic roots ``(phi, theta)`` as complex numbers."""
    b = alpha - delta + 1
    root = np.sqrt(complex(discriminant(alpha, delta)))
    return complex((b - root) / 2), complex((b + root) / 2)


def _step(alpha, delta, prev, cur):
    # equality case of consecutive constraints
    return alpha * (cur - prev) - (delta - 1) * cur


def _first_terms(alpha, delta, a_u):
    return a_u, alpha * (a_u + 1) - delta * a_u


@dataclass(frozen=True)
class SequenceAnalysis:
    """Outcome of :func:`min_k_for_epsilon`.

    ``r`` is the largest number of steps after the first positive term
    before the equality recurrence turns negative, over the start grid.
    ``k_bound = ceil((alpha + 1) ** r)`` is the resulting depth bound,
    ``empirical_sup`` the largest term seen before any sequence turns
    negative, and ``empirical_k`` the smallest integer above it.
    """

    variant: int
    epsilon: float
    alpha: float
    delta: int
    discriminant: float
    phi: complex
    theta: complex
    r: int
    k_bound: int
    empirical_sup: float
    empirical_k: int
    grid_points: int

    def as_dict(self):
        return {
            "variant": self.variant,
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "delta": self.delta,
            "discriminant": self.discriminant,
            "phi": [self.phi.real, self.phi.imag],
            "theta": [self.theta.real, self.theta.imag],
            "r": self.r,
            "k_bound": self.k_bound,
            "empirical_sup": self.empirical_sup,
            "empirical_k": self.empirical_k,
            "grid_points": self.grid_points,
        }


def alpha_for(epsilon, variant):
    """Target ratio ``critical - epsilon`` for the variant."""
    _delta(variant)
    crit = CRITICAL[variant]
    alpha = crit - epsilon
    if not 0 < epsilon or alpha <= 1:
        raise EpsilonOutOfRange(f"epsilon must lie in (0, {crit - 1:g}) for variant {variant}")
    return alpha


def _grid(alpha, points):
    return alpha * np.arange(1, points + 1) / points


def _run(alpha, delta, starts):
    """Simulate the equality recurrence from each start in ``starts``.

    Returns ``(steps, sup)``: for each start the number of steps until a
    negative term, and the largest nonnegative term reached.
    """
    prev, cur = _first_terms(alpha, delta, np.asarray(starts, dtype=float))
    prev = prev.copy()
    steps = np.ones_like(prev, dtype=np.int64)
    sup = np.maximum(prev, np.where(cur >= 0, cur, 0))
    alive = cur >= 0
    for _ in range(MAX_STEPS):
        if not alive.any():
            break
        nxt = _step(alpha, delta, prev, cur)
        steps += alive
        alive_next = alive & (nxt >= 0)
        sup = np.where(alive_next, np.maximum(sup, nxt), sup)
        prev, cur, alive = cur, nxt, alive_next
    else:
        raise RuntimeError("recurrence did not turn negative")
    return steps, sup


def min_k_for_epsilon(epsilon, variant=1, grid_points=GRID_POINTS):
    """Depth bound above which ratio ``critical - epsilon`` cannot be held.

    Variant 1 covers the discrete radius (``delta = 1``, critical value 4),
    variant 2 diameter and radius (``delta = 2``, critical value
    ``3 + 2 sqrt 2``).
    """
    alpha = alpha_for(epsilon, variant)
    delta = VARIANTS[variant]
    disc = discriminant(alpha, delta)
    phi, theta = roots(alpha, delta)
    steps, sup = _run(alpha, delta, _grid(alpha, grid_points))
    r = int(steps.max())
    k_bound = math.ceil((alpha + 1) ** r)
    esup = float(sup.max())
    return SequenceAnalysis(variant, float(epsilon), alpha, delta, disc, phi, theta, r,
                            k_bound, esup, math.floor(esup) + 1, grid_points)


def closed_form(alpha, delta, a_u, m):
    """Term ``a_{u+m}`` of the equality recurrence via its characteristic roots."""
    phi, theta = roots(alpha, delta)
    a0, a1 = _first_terms(alpha, delta, a_u)
    x = (theta * a0 - a1) / (theta - phi)
    y = (a1 - phi * a0) / (theta - phi)
    return (x * phi ** m + y * theta ** m).real


def feasible_sequence_search(k, epsilon, variant=2, s_max=MAX_LENGTH, grid_points=GRID_POINTS):
    """Look for an anchor sequence ending at ``k`` whose ratios all stay at
    most ``critical - epsilon``.

    Only canonical sequences are tried: a start ``a_u`` from a grid on
    ``(0, alpha]`` followed by the equality recurrence while it stays
    nonnegative.  The first term reaching ``k`` is lowered to ``k``, which
    keeps its constraint satisfied.  Returns the sequence with its leading
    0, or ``None``; ``None`` only rules out starts on the grid.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 1 <= s_max <= MAX_LENGTH:
        raise ValueError(f"s_max must lie in 1..{MAX_LENGTH}")
    alpha = alpha_for(epsilon, variant)
    delta = VARIANTS[variant]
    if k <= alpha:
        return (0.0, float(k))
    for a_u in _grid(alpha, grid_points):
        prev, cur = _first_terms(alpha, delta, float(a_u))
        seq = [0.0, prev]
        while len(seq) <= s_max and cur >= 0:
            if cur >= k:
                seq.append(float(k))
                return tuple(seq)
            seq.append(cur)
            prev, cur = cur, _step(alpha, delta, prev, cur)
    return None
