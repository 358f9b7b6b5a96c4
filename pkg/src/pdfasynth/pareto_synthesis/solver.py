"""Pareto value iteration, strategy extraction and rollouts on product games."""
from __future__ import annotations

import csv
import io
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import (InternalInconsistency, IterationBoundExceeded, MonotonicityViolation,
                      PointNotAchievable)
from ..game import ENV, ROBOT, SINK, TERMINAL, ProductGame
from . import _fallback
from .kernel import get_backend
from .sets import INF, dominates, in_upset, is_top

OWNER_CODES = {ROBOT: 0, ENV: 1, TERMINAL: 2, SINK: 3}
FLOAT_EPS = 1e-9


def default_eps(pg: ProductGame) -> float:
    """Zero for integer-weighted games (exact in float64), a small margin otherwise."""
    for row in pg.edges:
        for _, _, w in row:
            for x in w:
                if x != INF and not float(x).is_integer():
                    return FLOAT_EPS
    return 0.0


def _compile(backend, pg: ProductGame):
    codes = [OWNER_CODES[o] for o in pg.owner]
    rows = [[(d, w) for _, d, w in row] for row in pg.edges]
    return backend.compile_game(codes, rows, pg.dim)


@dataclass
class ParetoResult:
    """Fixed point of the backup operator plus every intermediate iterate."""

    game: ProductGame
    eps: float
    iterations: int
    bound: int
    backend: str
    _history: list = field(repr=False)
    _compiled: object = field(repr=False)
    _backend: object = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def level(self, k: int) -> list:
        """Value map after ``k`` sweeps (clamped to the fixed point)."""
        k = min(k, len(self._history) - 1)
        if k not in self._cache:
            self._cache[k] = self._backend.to_sets(self._compiled, self._history[k])
        return self._cache[k]

    @property
    def n_levels(self) -> int:
        return len(self._history)

    @property
    def values(self) -> list:
        return self.level(len(self._history) - 1)

    def front(self, state: int | None = None) -> tuple:
        return self.values[self.game.initial if state is None else state]

    def winning(self, state: int | None = None) -> bool:
        return not any(is_top(p) for p in self.front(state))


def compute_pareto_front(pg: ProductGame, eps: float | None = None, backend: str | None = None,
                         check_monotone: bool = True) -> ParetoResult:
    """Iterate the backup operator from the all-infinite map until it stops changing."""
    be = get_backend(backend)
    eps = default_eps(pg) if eps is None else eps
    cg = _compile(be, pg)
    u = be.initial_values(cg)
    history = [u]
    bound = pg.n_states * (pg.n_states + pg.n_edges)
    it = 0
    while True:
        it += 1
        if it > bound:
            raise IterationBoundExceeded(f"no fixed point after {bound} sweeps")
        nu = be.sweep(cg, u, eps)
        if check_monotone:
            bad = be.first_not_covering(cg, nu, u, eps)
            if bad >= 0:
                raise MonotonicityViolation(f"value at {pg.name(bad)} got worse in sweep {it}")
        if be.same_values(cg, nu, u, eps):
            break
        history.append(nu)
        u = nu
    return ParetoResult(pg, eps, it, bound, be.name, history, cg, be)


def apply_fp(pg: ProductGame, u: Sequence, eps: float = 0.0) -> list:
    """One application of the backup operator on an explicit value map."""
    cg = _compile(_fallback, pg)
    return _fallback.to_sets(cg, _fallback.sweep(cg, _fallback.from_sets(cg, u), eps))


def initial_value_map(pg: ProductGame) -> list:
    cg = _compile(_fallback, pg)
    return _fallback.initial_values(cg)


# ------------------------------------------------------------------- strategies


@dataclass
class StrategyNode:
    id: int
    state: int
    budget: tuple
    level: int
    action: object = None
    succ: dict = field(default_factory=dict)  # action -> node id


@dataclass
class Strategy:
    """Deterministic strategy with budget memory.

    Each node pairs a product state with the remaining payoff budget and the
    number of sweeps that budget needs; robot nodes fix one action, environment
    nodes keep a successor for every move.
    """

    point: tuple
    nodes: list
    root: int
    game: ProductGame = field(repr=False, default=None)

    def choice(self) -> dict:
        """First-visit action per robot product state (breadth first)."""
        out = {}
        for n in self._bfs():
            if n.action is not None and n.state not in out:
                out[n.state] = n.action
        return out

    def budget(self) -> dict:
        out = {}
        for n in self._bfs():
            out.setdefault(n.state, n.budget)
        return out

    def reachable_edges(self) -> list:
        return [(n.state, a, self.nodes[m].state) for n in self._bfs() for a, m in n.succ.items()]

    def _bfs(self):
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            i = queue.popleft()
            yield self.nodes[i]
            for m in self.nodes[i].succ.values():
                if m not in seen:
                    seen.add(m)
                    queue.append(m)

    def is_acyclic(self) -> bool:
        state = {}

        def visit(i):
            state[i] = 1
            for m in self.nodes[i].succ.values():
                if state.get(m) == 1:
                    return False
                if m not in state and not visit(m):
                    return False
            state[i] = 2
            return True

        return visit(self.root)

    def dumps(self) -> str:
        g = self.game
        name = g.name if g is not None else str
        lines = ["point " + " ".join(_fmt(x) for x in self.point)]
        for n in self._bfs():
            act = "-" if n.action is None else n.action
            lines.append(f"node {n.id} at {name(n.state)} do {act} budget "
                         + " ".join(_fmt(x) for x in n.budget))
            for a, m in n.succ.items():
                lines.append(f"succ {n.id} {a} {m}")
        return "\n".join(lines) + "\n"


def _fmt(x):
    return "inf" if x == INF else repr(x)


def _sub(b, w):
    return tuple(x - y for x, y in zip(b, w))


def extract_strategy(pg: ProductGame, result: ParetoResult, point: Sequence[float]) -> Strategy:
    """Strategy enforcing payoff at most ``point`` against every environment behaviour.

    From a budget ``b`` at a robot state, the first move (in edge order) whose
    remaining budget ``b - w`` is still achievable with fewer sweeps is taken;
    at environment states every move must satisfy the same condition. The
    sweep count strictly decreases along every edge, so the strategy graph is
    acyclic and every play ends at the terminal state.
    """
    eps = result.eps
    point = tuple(point)
    top_level = result.n_levels - 1

    def lowest_level(state, budget, below):
        for j in range(0, below):
            if in_upset(budget, result.level(j)[state], eps):
                return j
        return None

    root_level = lowest_level(pg.initial, point, top_level + 1)
    if root_level is None or is_top(point):
        raise PointNotAchievable(f"{point} is not enforceable from the initial state")
    nodes = []
    index = {}

    def node_for(state, budget, level):
        key = (state, budget, level)
        if key not in index:
            index[key] = len(nodes)
            nodes.append(StrategyNode(len(nodes), state, budget, level))
            queue.append(index[key])
        return index[key]

    queue = deque()
    root = node_for(pg.initial, point, root_level)
    while queue:
        n = nodes[queue.popleft()]
        owner = pg.owner[n.state]
        if owner == TERMINAL:
            continue
        if owner == SINK:
            raise InternalInconsistency(f"strategy reaches the losing sink with budget {n.budget}")
        if owner == ROBOT:
            for a, d, w in pg.edges[n.state]:
                rem = _sub(n.budget, w)
                j = lowest_level(d, rem, n.level)
                if j is not None:
                    n.action = a
                    n.succ[a] = node_for(d, rem, j)
                    break
            else:
                raise InternalInconsistency(f"no admissible move at {pg.name(n.state)} "
                                            f"with budget {n.budget}")
        else:
            for a, d, w in pg.edges[n.state]:
                rem = _sub(n.budget, w)
                j = lowest_level(d, rem, n.level)
                if j is None:
                    raise InternalInconsistency(f"environment move {a!r} at {pg.name(n.state)} "
                                                f"breaks budget {n.budget}")
                n.succ[a] = node_for(d, rem, j)
    strat = Strategy(point, nodes, root, pg)
    _remove_loops(strat)
    return strat


def _remove_loops(strat: Strategy) -> None:
    """Drop strategy nodes that cannot reach the terminal state (backward reachability)."""
    pg = strat.game
    preds = {i: set() for i in range(len(strat.nodes))}
    for n in strat.nodes:
        for m in n.succ.values():
            preds[m].add(n.id)
    good = {n.id for n in strat.nodes if pg.owner[n.state] == TERMINAL}
    queue = deque(good)
    while queue:
        i = queue.popleft()
        for j in preds[i]:
            if j not in good:
                good.add(j)
                queue.append(j)
    for n in strat.nodes:
        n.succ = {a: m for a, m in n.succ.items() if m in good}
        if n.action is not None and n.action not in n.succ:
            raise InternalInconsistency(f"robot choice at {pg.name(n.state)} lost by loop removal")


# --------------------------------------------------------------------- rollouts


@dataclass
class Episode:
    payoff: tuple
    terminated: bool
    dominated: bool
    steps: int
    states: tuple = field(repr=False, default=())


@dataclass
class RolloutReport:
    point: tuple
    episodes: list
    policy: str

    @property
    def completion_rate(self) -> float:
        return sum(e.terminated for e in self.episodes) / len(self.episodes)

    @property
    def dominance_rate(self) -> float:
        return sum(e.dominated for e in self.episodes) / len(self.episodes)

    def worst(self) -> tuple:
        return tuple(max(e.payoff[i] for e in self.episodes) for i in range(len(self.point)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = len(self.point)
        w.writerow(["episode"] + [f"c{i}" for i in range(dim)] + ["terminated", "dominated", "steps"])
        for k, e in enumerate(self.episodes):
            w.writerow([k] + [repr(x) for x in e.payoff] + [int(e.terminated), int(e.dominated), e.steps])
        return buf.getvalue()


ENV_POLICIES = ("random", "adversarial-greedy", "scripted")


def simulate(pg: ProductGame, strat: Strategy, env_policy: str = "random", episodes: int = 1,
             seed: int = 0, values: Sequence | None = None, component: int = -1,
             script: Sequence | None = None, eps: float = FLOAT_EPS) -> RolloutReport:
    """Play the strategy against an environment policy until the terminal or |S^P| steps."""
    if env_policy not in ENV_POLICIES:
        raise ValueError(f"env_policy must be one of {ENV_POLICIES}")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if env_policy == "adversarial-greedy" and values is None:
        raise ValueError("adversarial-greedy needs the value map")
    if env_policy == "scripted" and script is None:
        raise ValueError("scripted policy needs a script")
    cap = pg.n_states
    out = []
    for ep in range(episodes):
        rng = random.Random(seed * 1_000_003 + ep)
        pending = list(script) if script is not None else []
        node = strat.nodes[strat.root]
        total = [0] * pg.dim
        states = [node.state]
        steps = 0
        while pg.owner[node.state] != TERMINAL and steps < cap:
            if pg.owner[node.state] == ROBOT:
                action = node.action
            else:
                moves = pg.edges[node.state]
                if env_policy == "random":
                    action = moves[rng.randrange(len(moves))][0]
                elif env_policy == "scripted":
                    if not pending:
                        raise ValueError("environment script exhausted")
                    action = pending.pop(0)
                else:
                    def worst(m):
                        _, d, w = m
                        return max(w[component] + p[component] for p in values[d])
                    action = max(moves, key=worst)[0]
            _, w = pg.edge(node.state, action)
            total = [x + y for x, y in zip(total, w)]
            node = strat.nodes[node.succ[action]]
            states.append(node.state)
            steps += 1
        done = pg.owner[node.state] == TERMINAL
        payoff = tuple(total)
        out.append(Episode(payoff, done, done and dominates(payoff, strat.point, eps), steps,
                           tuple(states)))
    return RolloutReport(strat.point, out, env_policy)


# ---------------------------------------------------------------------- exports


def front_csv(pg: ProductGame, values: Sequence, states: Sequence[int] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state", "name", "point"] + [f"c{i}" for i in range(pg.dim)])
    for s in (range(pg.n_states) if states is None else states):
        for k, p in enumerate(values[s]):
            w.writerow([s, pg.name(s), k] + [_fmt(x) for x in p])
    return buf.getvalue()
