"""Turn-based weighted game graphs and their product with a PDFA."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .automata import Pdfa
from .errors import DimensionMismatch, FormatError, PathNotTerminal
from .symbols import Alphabet, parse_alphabet_header, parse_symbol

ROBOT = "robot"
ENV = "env"
TERMINAL = "terminal"
SINK = "sink"
OWNERS = (ROBOT, ENV)
FINISH = "finish"
FINISH_POLICIES = ("robot-only", "any-state")
ZERO_PROB_POLICIES = ("omit", "sink")

INF = math.inf


def _vec(w):
    return tuple(w)


@dataclass(frozen=True)
class GameGraph:
    """``edges[s]`` lists ``(action, destination, weight-vector)`` triples."""

    alphabet: Alphabet
    owner: tuple
    labels: tuple
    edges: tuple
    initial: int = 0
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        n = len(self.owner)
        object.__setattr__(self, "edges", tuple(tuple((a, d, _vec(w)) for a, d, w in row)
                                                for row in self.edges))
        if len(self.labels) != n or len(self.edges) != n or n == 0:
            raise ValueError("owner, labels and edges must describe the same states")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        dim = None
        for s, row in enumerate(self.edges):
            if self.owner[s] not in OWNERS:
                raise ValueError(f"unknown owner {self.owner[s]!r}")
            if not row:
                raise ValueError(f"state {self.name(s)} has no actions")
            seen = set()
            for a, d, w in row:
                if a in seen:
                    raise ValueError(f"duplicate action {a!r} at state {self.name(s)}")
                seen.add(a)
                if not 0 <= d < n:
                    raise ValueError(f"edge target out of range at state {self.name(s)}")
                if dim is None:
                    dim = len(w)
                elif len(w) != dim:
                    raise DimensionMismatch("all weight vectors need the same dimension")
                if any(x < 0 for x in w):
                    raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "dim", dim)

    @property
    def n_states(self) -> int:
        return len(self.owner)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.edges)

    def name(self, s: int) -> str:
        return self.names[s] if self.names else f"s{s}"

    def step(self, s: int, action):
        for a, d, w in self.edges[s]:
            if a == action:
                return d, w
        raise KeyError(f"action {action!r} not available at {self.name(s)}")


@dataclass(frozen=True)
class Play:
    states: tuple
    actions: tuple

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("a play has one more state than actions")


def game_payoff(g: GameGraph, play: Play) -> tuple:
    total = [0] * g.dim
    for k, a in enumerate(play.actions):
        d, w = g.step(play.states[k], a)
        if d != play.states[k + 1]:
            raise ValueError(f"play is inconsistent at step {k}")
        total = [x + y for x, y in zip(total, w)]
    return tuple(total)


def play_trace(g: GameGraph, play: Play) -> tuple:
    return tuple(g.labels[s] for s in play.states)


def augment(g: GameGraph, action: str = "start") -> GameGraph:
    """Prepend a robot-owned initial state with one zero-weight move to the old start.

    The new state is appended as the last state id and carries the empty label,
    so the old start's label is the first symbol fed to the PDFA.
    """
    n = g.n_states
    zero = tuple(0 for _ in range(g.dim))
    names = tuple(g.name(s) for s in range(n)) + ("init",)
    return GameGraph(g.alphabet, g.owner + (ROBOT,), g.labels + (0,),
                     g.edges + (((action, g.initial, zero),),), n, names)


# ------------------------------------------------------------------- product


@dataclass(frozen=True)
class ProductGame:
    """Weighted turn-based game with a terminal state; last weight entry is preference."""

    owner: tuple
    edges: tuple  # edges[s] -> ((action, dst, weight), ...)
    initial: int
    terminal: int
    names: tuple = field(default=(), compare=False)
    pairs: tuple = field(default=(), compare=False)  # (game state, pdfa state) or None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple((a, d, _vec(w)) for a, d, w in row)
                                                for row in self.edges))
        n = len(self.owner)
        if len(self.edges) != n:
            raise ValueError("owner and edges must describe the same states")
        if self.owner[self.terminal] != TERMINAL or self.edges[self.terminal]:
            raise ValueError("the terminal state must be owned by 'terminal' and have no edges")
        dim = None
        for s, row in enumerate(self.edges):
            if self.owner[s] not in (ROBOT, ENV, TERMINAL, SINK):
                raise ValueError(f"unknown owner {self.owner[s]!r}")
            if self.owner[s] == ENV and not row:
                raise ValueError(f"environment state {self.name(s)} has no moves")
            for a, d, w in row:
                if not 0 <= d < n:
                    raise ValueError("edge target out of range")
                if dim is None:
                    dim = len(w)
                elif len(w) != dim:
                    raise DimensionMismatch("all weight vectors need the same dimension")
                if any(x < 0 for x in w):
                    raise ValueError("weights must be nonnegative")
        if dim is None:
            raise ValueError("a product game needs at least one edge to fix the weight dimension")
        object.__setattr__(self, "dim", dim)

    @property
    def n_states(self) -> int:
        return len(self.owner)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.edges)

    def name(self, s: int) -> str:
        return self.names[s] if self.names else f"p{s}"

    def index(self, name: str) -> int:
        return list(self.names).index(name)

    def edge(self, s: int, action, dst=None):
        for a, d, w in self.edges[s]:
            if a == action and (dst is None or d == dst):
                return d, w
        raise KeyError(f"no edge {action!r} from {self.name(s)}")


def build_product(g: GameGraph, p: Pdfa, finish_policy: str = "robot-only",
                  env_zero_prob: str = "omit") -> ProductGame:
    """Synchronous product of an augmented game with a PDFA.

    Moves whose destination label has zero probability are dropped for the
    robot. For the environment the default also drops them; with
    ``env_zero_prob="sink"`` they lead to a losing sink with infinite
    preference cost instead, so the adversary keeps every move it has in the
    game. An environment state left without moves becomes a losing sink.
    """
    if finish_policy not in FINISH_POLICIES:
        raise ValueError(f"finish_policy must be one of {FINISH_POLICIES}")
    if env_zero_prob not in ZERO_PROB_POLICIES:
        raise ValueError(f"env_zero_prob must be one of {ZERO_PROB_POLICIES}")
    if g.alphabet != p.alphabet:
        raise ValueError("game and PDFA alphabets differ")
    zero = tuple(0 for _ in range(g.dim))
    start = (g.initial, p.initial)
    index = {start: 0}
    order = [start]
    rows = []
    uses_sink = False
    i = 0
    while i < len(order):
        s, q = order[i]
        row = []
        for a, s2, w in g.edges[s]:
            hit = p.trans[q].get(g.labels[s2])
            if hit is None:
                if g.owner[s] == ENV and env_zero_prob == "sink":
                    row.append((a, "sink", w + (INF,)))
                    uses_sink = True
                continue
            q2, prob = hit
            nxt = (s2, q2)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append((a, index[nxt], w + (0.0 - math.log(prob),)))
        if p.term[q] > 0 and (finish_policy == "any-state" or g.owner[s] == ROBOT):
            row.append((FINISH, "terminal", zero + (0.0 - math.log(p.term[q]),)))
        rows.append(row)
        i += 1
    n = len(order)
    terminal = n
    sink = n + 1 if uses_sink else None
    fix = {"terminal": terminal, "sink": sink}
    edges = [tuple((a, fix.get(d, d) if isinstance(d, str) else d, w) for a, d, w in row)
             for row in rows]
    owner = [g.owner[s] if rows[k] or g.owner[s] == ROBOT else SINK
             for k, (s, _) in enumerate(order)] + [TERMINAL]
    names = [f"({g.name(s)},{p.name(q)})" for s, q in order] + ["s_t"]
    pairs = list(order) + [None]
    edges.append(())
    if uses_sink:
        owner.append(SINK)
        names.append("dead")
        pairs.append(None)
        edges.append(())
    return ProductGame(tuple(owner), tuple(edges), 0, terminal, tuple(names), tuple(pairs))


def total_payoff(pg: ProductGame, play: Play) -> tuple:
    """Sum of edge weights along a product play that ends at the terminal state."""
    if play.states[-1] != pg.terminal:
        raise PathNotTerminal("path does not end at the terminal state")
    total = [0] * pg.dim
    for k, a in enumerate(play.actions):
        _, w = pg.edge(play.states[k], a, play.states[k + 1])
        total = [x + y for x, y in zip(total, w)]
    return tuple(total)


# ----------------------------------------------------------------- text formats


def _fmt(x):
    return "inf" if x == INF else repr(x)


def _num(tok):
    if tok in ("inf", "+inf"):
        return INF
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def dumps_game(g: GameGraph) -> str:
    lines = [g.alphabet.header(), f"initial {g.initial}"]
    for s in range(g.n_states):
        lines.append(f"state {s} {g.owner[s]} {g.alphabet.render(g.labels[s])} name {g.name(s)}")
    for s, row in enumerate(g.edges):
        for a, d, w in row:
            lines.append(" ".join([f"edge {s} {a} {d}"] + [_fmt(x) for x in w]))
    return "\n".join(lines) + "\n"


def loads_game(text: str) -> GameGraph:
    alphabet = None
    initial = 0
    states = {}
    edges = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        hdr = parse_alphabet_header(line)
        if hdr is not None:
            alphabet = hdr
            continue
        parts = line.split()
        try:
            if parts[0] == "initial":
                initial = int(parts[1])
            elif parts[0] == "state":
                if alphabet is None:
                    raise FormatError("state before alphabet header", lineno)
                s = int(parts[1])
                name = parts[parts.index("name") + 1] if "name" in parts else f"s{s}"
                states[s] = (parts[2], parse_symbol(parts[3], alphabet), name)
            elif parts[0] == "edge":
                s = int(parts[1])
                edges.setdefault(s, []).append((parts[2], int(parts[3]),
                                                tuple(_num(x) for x in parts[4:])))
            else:
                raise FormatError(f"unknown directive {parts[0]!r}", lineno)
        except (ValueError, IndexError):
            raise FormatError(f"malformed line {line!r}", lineno) from None
    if alphabet is None or not states:
        raise FormatError("missing alphabet header or states")
    n = max(states) + 1
    if sorted(states) != list(range(n)):
        raise FormatError("state ids must be 0..n-1")
    return GameGraph(alphabet, tuple(states[s][0] for s in range(n)),
                     tuple(states[s][1] for s in range(n)),
                     tuple(tuple(edges.get(s, ())) for s in range(n)), initial,
                     tuple(states[s][2] for s in range(n)))


def dumps_product(pg: ProductGame) -> str:
    lines = [f"dim {pg.dim}", f"initial {pg.initial}", f"terminal {pg.terminal}"]
    for s in range(pg.n_states):
        lines.append(f"state {s} {pg.owner[s]} name {pg.name(s)}")
    for s, row in enumerate(pg.edges):
        for a, d, w in row:
            lines.append(" ".join([f"edge {s} {a} {d}"] + [_fmt(x) for x in w]))
    return "\n".join(lines) + "\n"


def loads_product(text: str) -> ProductGame:
    initial = 0
    terminal = None
    states = {}
    edges = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "dim":
                pass
            elif parts[0] == "initial":
                initial = int(parts[1])
            elif parts[0] == "terminal":
                terminal = int(parts[1])
            elif parts[0] == "state":
                s = int(parts[1])
                name = parts[parts.index("name") + 1] if "name" in parts else f"p{s}"
                states[s] = (parts[2], name)
            elif parts[0] == "edge":
                edges.setdefault(int(parts[1]), []).append(
                    (parts[2], int(parts[3]), tuple(_num(x) for x in parts[4:])))
            else:
                raise FormatError(f"unknown directive {parts[0]!r}", lineno)
        except (ValueError, IndexError):
            raise FormatError(f"malformed line {line!r}", lineno) from None
    if terminal is None:
        raise FormatError("missing terminal declaration")
    n = max(states) + 1
    return ProductGame(tuple(states[s][0] for s in range(n)),
                       tuple(tuple(edges.get(s, ())) for s in range(n)), initial, terminal,
                       tuple(states[s][1] for s in range(n)))


def save_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _dot_weight(w):
    return "[" + ",".join("inf" if x == INF else f"{x:.3g}" for x in w) + "]"


def game_to_dot(g: GameGraph, legend=None, title="game") -> str:
    out = [f"digraph {title} {{", "  __start [shape=point];"]
    for s in range(g.n_states):
        shape = "circle" if g.owner[s] == ROBOT else "square"
        out.append(f'  n{s} [shape={shape}, label="{g.name(s)}\\n{g.alphabet.render(g.labels[s], legend)}"];')
    out.append(f"  __start -> n{g.initial};")
    for s, row in enumerate(g.edges):
        for a, d, w in row:
            out.append(f'  n{s} -> n{d} [label="{a}:{_dot_weight(w)}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def product_to_dot(pg: ProductGame, values=None, title="product") -> str:
    """Robot states are circles, environment states squares; optional value annotations."""
    shapes = {ROBOT: "circle", ENV: "square", TERMINAL: "doublecircle", SINK: "octagon"}
    out = [f"digraph {title} {{", "  __start [shape=point];"]
    for s in range(pg.n_states):
        label = pg.name(s)
        if values is not None:
            pts = "; ".join(_dot_weight(v) for v in values[s])
            label += f"\\n{{{pts}}}"
        out.append(f'  n{s} [shape={shapes[pg.owner[s]]}, label="{label}"];')
    out.append(f"  __start -> n{pg.initial};")
    for s, row in enumerate(pg.edges):
        for a, d, w in row:
            out.append(f'  n{s} -> n{d} [label="{a}:{_dot_weight(w)}"];')
    out.append("}")
    return "\n".join(out) + "\n"
