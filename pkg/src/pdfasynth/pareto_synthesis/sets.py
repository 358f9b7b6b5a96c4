"""Antichains of payoff vectors standing for the upsets they generate.

Smaller is better in every component; ``math.inf`` marks an unreachable
objective. A point with an infinite component is normalized to the all-infinite
top element, so losing outcomes never carry partial credit.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

from ..errors import DimensionMismatch

INF = math.inf


def top(dim: int) -> tuple:
    return (INF,) * dim


def zero(dim: int) -> tuple:
    return (0,) * dim


def is_top(point: Sequence[float]) -> bool:
    return all(x == INF for x in point)


def normalize(point: Sequence[float]) -> tuple:
    if any(x == INF for x in point):
        return (INF,) * len(point)
    return tuple(point)


def _check(v, w):
    if len(v) != len(w):
        raise DimensionMismatch(f"dimension {len(v)} vs {len(w)}")


def dominates(v: Sequence[float], w: Sequence[float], eps: float = 0.0) -> bool:
    """``v`` is at least as good as ``w`` in every component (up to ``eps``)."""
    _check(v, w)
    return all(a <= b + eps for a, b in zip(v, w))


def strictly_dominates(v, w) -> bool:
    _check(v, w)
    return all(a < b for a, b in zip(v, w))


def pareto_min(points: Iterable[Sequence[float]], eps: float = 0.0) -> tuple:
    """Minimal generators of the upset of ``points``, in lexicographic order.

    Uses weak dominance, so a point that ties another in some components and is
    worse in the rest is dropped, and duplicates collapse.
    """
    pts = sorted({normalize(p) for p in points})
    if pts:
        d = len(pts[0])
        if any(len(p) != d for p in pts):
            raise DimensionMismatch("points of mixed dimension")
    kept = []
    for p in pts:
        if any(all(a <= b + eps for a, b in zip(k, p)) for k in kept):
            continue
        if eps:
            kept = [k for k in kept if not all(a <= b + eps for a, b in zip(p, k))]
        kept.append(p)
    return tuple(kept)


def _dims(a, b):
    for x in a:
        for y in b:
            _check(x, y)
            return


def upset_union(a: Iterable, b: Iterable, eps: float = 0.0) -> tuple:
    a, b = tuple(a), tuple(b)
    _dims(a, b)
    return pareto_min(a + b, eps)


def upset_intersection(a: Iterable, b: Iterable, eps: float = 0.0) -> tuple:
    a, b = tuple(a), tuple(b)
    _dims(a, b)
    return pareto_min((tuple(max(x, y) for x, y in zip(p, q)) for p in a for q in b), eps)


def shift(points: Iterable, w: Sequence[float]) -> tuple:
    return tuple(normalize(tuple(x + y for x, y in zip(p, w))) for p in points)


def in_upset(v: Sequence[float], points: Iterable, eps: float = 0.0) -> bool:
    """Is ``v`` dominated by (weakly worse than) some generator?"""
    return any(dominates(p, v, eps) for p in points)


def covers(new: Iterable, old: Iterable, eps: float = 0.0) -> bool:
    """``upset(new) ⊇ upset(old)``: every old generator is dominated by a new one."""
    new = tuple(new)
    return all(any(all(a <= b + eps for a, b in zip(n, o)) for n in new) for o in old)


def close(a: Sequence, b: Sequence, eps: float = 0.0) -> bool:
    """Componentwise Hausdorff distance at most ``eps`` (infinities must coincide)."""
    def near(p, q):
        return all(x == y or abs(x - y) <= eps for x, y in zip(p, q))
    if not eps:
        return tuple(a) == tuple(b)
    return all(any(near(p, q) for q in b) for p in a) and all(any(near(q, p) for p in a) for q in b)
