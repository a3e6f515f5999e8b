"""Approximate leximin order over utility vectors.

A vector ``y`` is (alpha, eps)-leximin-preferred over ``x`` when, comparing
the ascending-sorted vectors, there is an index ``k`` such that every earlier
entry of ``y`` is at least the matching entry of ``x`` and the ``k``-th entry
of ``y`` exceeds ``(x_k + eps) / alpha``.  With ``(1, 0)`` this is the usual
leximin comparison.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance used for every real comparison in the order.
TOL = 1e-9


@dataclass(frozen=True)
class ApproxFactors:
    """Multiplicative factor ``alpha`` in (0, 1] and additive slack ``epsilon`` >= 0."""

    alpha: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")

    @property
    def exact(self) -> bool:
        return self.alpha == 1.0 and self.epsilon == 0.0


EXACT = ApproxFactors(1.0, 0.0)


@dataclass(frozen=True)
class PreferenceWitness:
    """Index ``k`` (1-based) at which the preference is established, and by how much."""

    k: int
    margin: float


def utility_vector(values: Iterable[float]) -> np.ndarray:
    u = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("a utility vector needs at least one entry")
    return u


def sort_outcomes(u: Sequence[float] | np.ndarray) -> np.ndarray:
    """Ascending sort of a utility vector; equal values keep their input order."""
    return np.sort(utility_vector(u), kind="stable")


def egalitarian_value(u: Sequence[float] | np.ndarray) -> float:
    return float(np.min(utility_vector(u)))


def is_leximin_preferred(
    y: Sequence[float] | np.ndarray,
    x: Sequence[float] | np.ndarray,
    factors: ApproxFactors = EXACT,
    tol: float = TOL,
) -> PreferenceWitness | None:
    """Return the smallest witness ``k`` if ``y`` is preferred over ``x``, else ``None``."""
    ys, xs = sort_outcomes(y), sort_outcomes(x)
    if ys.shape != xs.shape:
        raise ValueError(f"length mismatch: {ys.size} vs {xs.size}")
    alpha, eps = factors.alpha, factors.epsilon
    for k in range(ys.size):
        threshold = (xs[k] + eps) / alpha
        if ys[k] > threshold + tol:
            return PreferenceWitness(k=k + 1, margin=float(ys[k] - threshold))
        # the prefix condition must hold at k before any later index can qualify
        if ys[k] < xs[k] - tol:
            return None
    return None


def relation_set(
    candidates: Sequence[Sequence[float]],
    factors: ApproxFactors = EXACT,
    tol: float = TOL,
) -> set[tuple[int, int]]:
    """All index pairs ``(i, j)`` with candidate ``i`` preferred over candidate ``j``."""
    vectors = [sort_outcomes(c) for c in candidates]
    if len({v.size for v in vectors}) > 1:
        raise ValueError("all candidates must have the same length")
    pairs = set()
    for i, yi in enumerate(vectors):
        for j, xj in enumerate(vectors):
            if i != j and is_leximin_preferred(yi, xj, factors, tol) is not None:
                pairs.add((i, j))
    return pairs


def is_approx_leximin_optimal(
    x: Sequence[float] | np.ndarray,
    candidates: Iterable[Sequence[float]],
    factors: ApproxFactors = EXACT,
    tol: float = TOL,
) -> bool:
    """True iff no candidate is preferred over ``x``."""
    return all(is_leximin_preferred(c, x, factors, tol) is None for c in candidates)


def factor_transform(factors: ApproxFactors) -> ApproxFactors:
    """Guarantee obtained when every per-iteration subproblem is solved to ``factors``.

    Maps (alpha, eps) to (alpha^2 / d, eps / d) with d = 1 - alpha + alpha^2.
    """
    a = factors.alpha
    d = 1.0 - a + a * a
    return ApproxFactors(a * a / d, factors.epsilon / d)


def leximin_key(u: Sequence[float] | np.ndarray) -> tuple[float, ...]:
    """Sort key under which ``max`` picks a leximin-maximal vector."""
    return tuple(sort_outcomes(u).tolist())


def leximin_maximum(candidates: Sequence[Sequence[float]]) -> int:
    """Index of a leximin-maximal candidate by plain sort-and-compare (smallest index on ties)."""
    if not candidates:
        raise ValueError("no candidates")
    best = 0
    best_key = leximin_key(candidates[0])
    for i in range(1, len(candidates)):
        key = leximin_key(candidates[i])
        if key > best_key:
            best, best_key = i, key
    return best
