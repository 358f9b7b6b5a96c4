"""Probabilistic DFAs: evaluation, sampling, safety products and emptiness checks.

Stochasticity convention: for every state the outgoing transition mass plus the
termination mass sums to one (termination behaves like a reserved symbol).
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (EmptyIntersection, FormatError, MaxLengthExceeded, NonGenerativeState)
from .safety_spec import Dfa
from .symbols import Alphabet, Symbol, parse_alphabet_header, parse_symbol

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class Pdfa:
    """``trans[q]`` maps symbol -> (destination, probability); absent means zero."""

    alphabet: Alphabet
    trans: tuple
    term: tuple
    initial: int = 0
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        trans = tuple(dict(sorted(row.items())) for row in self.trans)
        object.__setattr__(self, "trans", trans)
        object.__setattr__(self, "term", tuple(float(x) for x in self.term))
        n = len(trans)
        if n == 0 or len(self.term) != n:
            raise ValueError("transition and termination tables must cover the same states")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for q, row in enumerate(trans):
            total = self.term[q]
            if not 0.0 <= total <= 1.0 + STOCHASTIC_TOL:
                raise ValueError(f"termination probability out of range at state {q}")
            for sym, (dst, prob) in row.items():
                if not 0 <= sym < self.alphabet.size or not 0 <= dst < n:
                    raise ValueError(f"bad transition at state {q}")
                if not 0.0 < prob <= 1.0 + STOCHASTIC_TOL:
                    raise ValueError(f"transition probability out of range at state {q}")
                total += prob
            if abs(total - 1.0) > STOCHASTIC_TOL:
                raise ValueError(f"state {q} is not stochastic: outgoing + termination = {total!r}")

    @property
    def n_states(self) -> int:
        return len(self.trans)

    @property
    def n_edges(self) -> int:
        return sum(len(row) for row in self.trans)

    @property
    def accepting(self) -> frozenset:
        return frozenset(q for q, f in enumerate(self.term) if f > 0)

    @property
    def dfa(self) -> Dfa:
        """Structural automaton; missing transitions go to a rejecting sink."""
        edges = {(q, s): d for q, row in enumerate(self.trans) for s, (d, _) in row.items()}
        return Dfa.from_partial(self.alphabet, self.n_states, edges, self.initial,
                                self.accepting, self.names)

    def name(self, q: int) -> str:
        return self.names[q] if self.names else f"q{q}"

    def prob(self, q: int, sym: Symbol) -> float:
        hit = self.trans[q].get(sym)
        return hit[1] if hit else 0.0

    def step(self, q: int, sym: Symbol):
        hit = self.trans[q].get(sym)
        return hit[0] if hit else None

    @classmethod
    def from_edges(cls, alphabet: Alphabet, n_states: int, edges: Mapping, term: Mapping,
                   initial: int = 0, names: Sequence[str] = ()) -> "Pdfa":
        """Build from ``{(q, symbol): (q', p)}`` and ``{q: F_P(q)}``."""
        trans = [dict() for _ in range(n_states)]
        for (q, sym), (dst, prob) in edges.items():
            if prob > 0:
                trans[q][sym] = (dst, float(prob))
        terms = [float(term.get(q, 0.0)) for q in range(n_states)]
        return cls(alphabet, tuple(trans), tuple(terms), initial, tuple(names))


@dataclass(frozen=True)
class TraceProbability:
    value: float
    log_value: float  # -ln(value), inf when value == 0


def trace_probability(p: Pdfa, trace: Sequence[Symbol]) -> TraceProbability:
    q = p.initial
    value = 1.0
    neg_log = 0.0
    for sym in trace:
        hit = p.trans[q].get(sym)
        if hit is None:
            return TraceProbability(0.0, math.inf)
        q, prob = hit
        value *= prob
        neg_log -= math.log(prob)
    f = p.term[q]
    if f <= 0:
        return TraceProbability(0.0, math.inf)
    value *= f
    neg_log -= math.log(f)
    return TraceProbability(value, neg_log)


def _draw(p: Pdfa, q: int, rng: random.Random):
    """Returns a symbol, or None for termination."""
    row = p.trans[q]
    mass = p.term[q] + sum(prob for _, prob in row.values())
    if mass <= 0:
        raise NonGenerativeState(f"state {q} has no outgoing or termination mass")
    r = rng.random() * mass
    acc = p.term[q]
    if r < acc:
        return None
    last = None
    for sym, (_, prob) in row.items():
        acc += prob
        last = sym
        if r < acc:
            return sym
    if last is None:
        return None
    return last  # rounding slack lands on the final outcome


def sample_trace(p: Pdfa, seed, max_len: int = 10_000, rng: random.Random | None = None) -> tuple:
    """Random walk from the initial state; reproducible for a given seed."""
    rng = rng if rng is not None else random.Random(seed)
    q = p.initial
    out = []
    while True:
        sym = _draw(p, q, rng)
        if sym is None:
            return tuple(out)
        if len(out) >= max_len:
            raise MaxLengthExceeded(f"trace exceeded {max_len} symbols")
        out.append(sym)
        q = p.trans[q][sym][0]


def sample_traces(p: Pdfa, n: int, seed, max_len: int = 10_000) -> list:
    rng = random.Random(seed)
    return [sample_trace(p, None, max_len, rng) for _ in range(n)]


# --------------------------------------------------------------------- products


def product_with_safety(p: Pdfa, safe: Dfa) -> Pdfa:
    """Restrict ``p`` to the traces accepted by ``safe`` and renormalize.

    Product states that cannot reach an accepting product state are pruned;
    the surviving outgoing and termination masses are divided by their sum.
    """
    if p.alphabet != safe.alphabet:
        raise ValueError("alphabets differ")
    start = (p.initial, safe.initial)
    index = {start: 0}
    order = [start]
    succ = []
    i = 0
    while i < len(order):
        q, s = order[i]
        row = {}
        for sym, (q2, prob) in p.trans[q].items():
            nxt = (q2, safe.delta[s][sym])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row[sym] = (index[nxt], prob)
        succ.append(row)
        i += 1

    def term_of(k):
        q, s = order[k]
        return p.term[q] if s in safe.accepting else 0.0

    preds = [set() for _ in order]
    for k, row in enumerate(succ):
        for k2, _ in row.values():
            preds[k2].add(k)
    alive = {k for k in range(len(order)) if term_of(k) > 0}
    queue = deque(alive)
    while queue:
        k = queue.popleft()
        for j in preds[k]:
            if j not in alive:
                alive.add(j)
                queue.append(j)
    if 0 not in alive:
        raise EmptyIntersection("no accepted trace of the PDFA satisfies the safety automaton")

    # renumber the surviving states breadth first
    keep = [0]
    new_id = {0: 0}
    j = 0
    while j < len(keep):
        for sym, (k2, _) in succ[keep[j]].items():
            if k2 in alive and k2 not in new_id:
                new_id[k2] = len(keep)
                keep.append(k2)
        j += 1
    trans = []
    term = []
    for k in keep:
        row = {sym: (k2, prob) for sym, (k2, prob) in succ[k].items() if k2 in alive}
        norm = sum(prob for _, prob in row.values()) + term_of(k)
        trans.append({sym: (new_id[k2], prob / norm) for sym, (k2, prob) in row.items()})
        term.append(term_of(k) / norm)
    names = tuple(f"({p.name(order[k][0])},{safe.name(order[k][1])})" for k in keep)
    return Pdfa(p.alphabet, tuple(trans), tuple(term), 0, names)


@dataclass(frozen=True)
class IntersectionResult:
    empty: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.empty


def language_empty_intersection(p: Pdfa, bad: Dfa) -> IntersectionResult:
    """Is no positive-probability trace of ``p`` accepted by ``bad``?

    On failure the result carries a shortest witness trace.
    """
    if p.alphabet != bad.alphabet:
        raise ValueError("alphabets differ")
    start = (p.initial, bad.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        q, b = node
        if p.term[q] > 0 and b in bad.accepting:
            word = []
            while parent[node] is not None:
                node, sym = parent[node]
                word.append(sym)
            return IntersectionResult(False, tuple(reversed(word)))
        for sym, (q2, _) in p.trans[q].items():
            nxt = (q2, bad.delta[b][sym])
            if nxt not in parent:
                parent[nxt] = (node, sym)
                queue.append(nxt)
    return IntersectionResult(True, None)


def match_structure(a: Pdfa, b: Pdfa) -> dict | None:
    """State bijection making the reachable parts of ``a`` and ``b`` identical, if any.

    Both automata are deterministic, so the bijection is forced by a joint
    breadth-first walk from the initial states.
    """
    if a.alphabet != b.alphabet:
        return None
    mapping = {a.initial: b.initial}
    used = {b.initial}
    queue = deque([a.initial])
    while queue:
        q = queue.popleft()
        r = mapping[q]
        if set(a.trans[q]) != set(b.trans[r]) or (a.term[q] > 0) != (b.term[r] > 0):
            return None
        for sym, (q2, _) in a.trans[q].items():
            r2 = b.trans[r][sym][0]
            if q2 in mapping:
                if mapping[q2] != r2:
                    return None
            else:
                if r2 in used:
                    return None
                mapping[q2] = r2
                used.add(r2)
                queue.append(q2)
    return mapping


def max_probability_gap(a: Pdfa, b: Pdfa, mapping: Mapping) -> float:
    gap = 0.0
    for q, r in mapping.items():
        gap = max(gap, abs(a.term[q] - b.term[r]))
        for sym, (_, prob) in a.trans[q].items():
            gap = max(gap, abs(prob - b.trans[r][sym][1]))
    return gap


def reachable_states(p: Pdfa) -> list:
    seen = {p.initial}
    order = [p.initial]
    for q in order:
        for q2, _ in p.trans[q].values():
            if q2 not in seen:
                seen.add(q2)
                order.append(q2)
    return order


# ----------------------------------------------------------------- serialization


def dumps_pdfa(p: Pdfa) -> str:
    lines = [p.alphabet.header()]
    for q in range(p.n_states):
        flags = []
        if q == p.initial:
            flags.append("initial")
        if p.term[q] > 0:
            flags.append("accepting")
        lines.append(" ".join(["state", str(q)] + flags))
    for q, row in enumerate(p.trans):
        for sym, (dst, prob) in row.items():
            lines.append(f"edge {q} {p.alphabet.render(sym)} {dst} prob {prob!r}")
    for q, f in enumerate(p.term):
        if f > 0:
            lines.append(f"term {q} {f!r}")
    return "\n".join(lines) + "\n"


def loads_pdfa(text: str) -> Pdfa:
    alphabet = None
    n = 0
    initial = 0
    edges = {}
    term = {}
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
            if parts[0] == "state":
                q = int(parts[1])
                n = max(n, q + 1)
                if "initial" in parts[2:]:
                    initial = q
            elif parts[0] == "edge":
                if alphabet is None or len(parts) != 6 or parts[4] != "prob":
                    raise FormatError("expected 'edge <src> <symbol> <dst> prob <p>'", lineno)
                edges[(int(parts[1]), parse_symbol(parts[2], alphabet))] = (int(parts[3]), float(parts[5]))
            elif parts[0] == "term":
                term[int(parts[1])] = float(parts[2])
            else:
                raise FormatError(f"unknown directive {parts[0]!r}", lineno)
        except (ValueError, IndexError):
            raise FormatError(f"malformed line {line!r}", lineno) from None
    if alphabet is None:
        raise FormatError("missing alphabet header")
    return Pdfa.from_edges(alphabet, n, edges, term, initial)


def save_pdfa(path, p: Pdfa) -> None:
    Path(path).write_text(dumps_pdfa(p), encoding="utf-8")


def load_pdfa(path) -> Pdfa:
    return loads_pdfa(Path(path).read_text(encoding="utf-8"))


def pdfa_to_dot(p: Pdfa, legend=None, title="pdfa") -> str:
    out = [f"digraph {title} {{", "  rankdir=LR;", "  __start [shape=point];"]
    for q in range(p.n_states):
        if p.term[q] > 0:
            out.append(f'  q{q} [shape=doublecircle, label="{p.name(q)}\\nF_P={p.term[q]:.3g}"];')
        else:
            out.append(f'  q{q} [shape=circle, label="{p.name(q)}"];')
    out.append(f"  __start -> q{p.initial};")
    for q, row in enumerate(p.trans):
        for sym, (dst, prob) in row.items():
            out.append(f'  q{q} -> q{dst} [label="{p.alphabet.render(sym, legend)}: {prob:.3g}"];')
    out.append("}")
    return "\n".join(out) + "\n"
