"""Pure-Python value-iteration kernel (reference implementation)."""
from __future__ import annotations

import math

from .sets import covers, close, pareto_min

INF = math.inf

ROBOT, ENV, TERMINAL, SINK = 0, 1, 2, 3

name = "python"


class CompiledGame:
    def __init__(self, owner, edges, dim):
        self.owner = owner          # list of int codes
        self.edges = edges          # per state: list of (dst, weight tuple of floats)
        self.dim = dim
        self.n = len(owner)


def compile_game(owner_codes, edge_rows, dim):
    edges = [[(d, tuple(float(x) for x in w)) for d, w in row] for row in edge_rows]
    return CompiledGame(list(owner_codes), edges, dim)


def initial_values(g: CompiledGame):
    top = (INF,) * g.dim
    zero = (0.0,) * g.dim
    return [(zero,) if g.owner[s] == TERMINAL else (top,) for s in range(g.n)]


def _shifted(points, w):
    out = []
    for p in points:
        v = tuple(a + b for a, b in zip(p, w))
        out.append(v)
    return out


def sweep(g: CompiledGame, u, eps):
    """One Jacobi application of the backup operator."""
    top = (INF,) * g.dim
    nxt = []
    for s in range(g.n):
        kind = g.owner[s]
        if kind == TERMINAL:
            nxt.append(u[s])
            continue
        row = g.edges[s]
        if kind == SINK or not row:
            nxt.append((top,))
            continue
        if kind == ROBOT:
            cands = []
            for d, w in row:
                cands.extend(_shifted(u[d], w))
            res = pareto_min(cands, eps)
        else:
            d, w = row[0]
            res = pareto_min(_shifted(u[d], w), eps)
            for d, w in row[1:]:
                other = _shifted(u[d], w)
                res = pareto_min([tuple(max(x, y) for x, y in zip(p, q)) for p in res for q in other], eps)
        nxt.append(res if res else (top,))
    return nxt


def first_not_covering(g: CompiledGame, new, old, eps) -> int:
    for s in range(g.n):
        if not covers(new[s], old[s], eps):
            return s
    return -1


def same_values(g: CompiledGame, a, b, eps) -> bool:
    return all(close(a[s], b[s], eps) for s in range(g.n))


def to_sets(g: CompiledGame, u):
    return [tuple(pts) for pts in u]


def from_sets(g: CompiledGame, sets):
    return [tuple(tuple(float(x) for x in p) for p in pts) for pts in sets]
