"""Evidence-driven state merging for PDFAs.

The learner starts from the frequency prefix tree of the demonstrations and
greedily folds blue frontier nodes into red core nodes while the likelihood
lost per eliminated state stays below ``alpha``.  Three variants:

* vanilla      plain red/blue merging;
* postprocess  vanilla followed by the product with the safety DFA;
* preprocess   every node carries the safety-DFA state of its prefix and only
               nodes with equal safety states may be merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import Pdfa, product_with_safety, trace_probability
from .errors import SafetyStateMismatch, UnsafeDemonstration
from .safety_spec import Dfa
from .symbols import DemoSet

MODES = ("vanilla", "postprocess", "preprocess")


@dataclass
class MergeParams:
    alpha: float = 1.0
    mode: str = "vanilla"
    blue_order: str = "frequency"  # highest freq_through first, then smallest id

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.blue_order not in ("frequency", "id"):
            raise ValueError("blue_order must be 'frequency' or 'id'")


@dataclass
class FptaNode:
    id: int
    freq_through: int = 0
    freq_end: int = 0
    children: dict = field(default_factory=dict)   # symbol -> node id
    edge_freq: dict = field(default_factory=dict)  # symbol -> count
    sources: frozenset = frozenset()
    safety_state: int | None = None
    parent: int | None = None  # single incoming tree edge, valid for blue and white nodes
    alive: bool = True

    def snapshot(self):
        return (self.freq_through, self.freq_end, dict(self.children), dict(self.edge_freq),
                self.sources, self.parent, self.alive)

    def restore(self, snap):
        (self.freq_through, self.freq_end, self.children, self.edge_freq,
         self.sources, self.parent, self.alive) = snap


def _node_ll(through, end, edge_freq) -> float:
    ll = 0.0
    for e in edge_freq.values():
        if e:
            ll += e * math.log(e / through)
    if end:
        ll += end * math.log(end / through)
    return ll


@dataclass
class MergeEvent:
    red: int
    blue: int
    score: float
    accepted: bool
    note: str = ""

    def line(self) -> str:
        if self.note == "apply":
            return f"merge red={self.red} blue={self.blue} score={self.score:.6g}"
        verdict = "accept" if self.accepted else "reject"
        score = "n/a" if math.isnan(self.score) else f"{self.score:.6g}"
        extra = f" {self.note}" if self.note else ""
        return f"{verdict} red={self.red} blue={self.blue} score={score}{extra}"


class Fdfa:
    """Frequency automaton under construction (prefix tree, then merged graph)."""

    def __init__(self, alphabet, nodes, safety: Dfa | None = None):
        self.alphabet = alphabet
        self.nodes = nodes
        self.initial = 0
        self.safety = safety
        self.red = {0}
        self._undo = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_demos(cls, demos: DemoSet, safety: Dfa | None = None) -> "Fdfa":
        return build_fpta(demos, safety)

    # -- queries ----------------------------------------------------------

    def alive_ids(self) -> list:
        return [n.id for n in self.nodes if n.alive]

    @property
    def n_states(self) -> int:
        return sum(1 for n in self.nodes if n.alive)

    def blue(self) -> list:
        out = set()
        for r in self.red:
            for c in self.nodes[r].children.values():
                if c not in self.red:
                    out.add(c)
        return sorted(out)

    def coloring(self) -> dict:
        blue = set(self.blue())
        return {i: "red" if i in self.red else "blue" if i in blue else "white"
                for i in self.alive_ids()}

    def log_likelihood(self) -> float:
        return sum(_node_ll(n.freq_through, n.freq_end, n.edge_freq) for n in self.nodes if n.alive)

    # -- merging ----------------------------------------------------------

    def _touch(self, i):
        if self._undo is not None and i not in self._undo:
            self._undo[i] = self.nodes[i].snapshot()

    def _fold(self, target, source, removed):
        t = self.nodes[target]
        s = self.nodes[source]
        if t.safety_state != s.safety_state:
            raise SafetyStateMismatch(f"nodes {target} and {source} track different safety states")
        self._touch(target)
        self._touch(source)
        t.freq_through += s.freq_through
        t.freq_end += s.freq_end
        t.sources = t.sources | s.sources
        s.alive = False
        removed.append(source)
        for sym, child in list(s.children.items()):
            t.edge_freq[sym] = t.edge_freq.get(sym, 0) + s.edge_freq[sym]
            if sym in t.children:
                self._fold(t.children[sym], child, removed)
            else:
                self._touch(child)
                t.children[sym] = child
                self.nodes[child].parent = target

    def _merge(self, red, blue) -> list:
        b = self.nodes[blue]
        p = self.nodes[b.parent]
        self._touch(b.parent)
        for sym, c in p.children.items():
            if c == blue:
                p.children[sym] = red
                break
        removed = []
        self._fold(red, blue, removed)
        return removed

    def merge_score(self, red, blue) -> float:
        """Likelihood lost per eliminated state if ``blue`` were folded into ``red``.

        The merge is applied tentatively and rolled back. Raises
        SafetyStateMismatch when folding would align different safety states.
        """
        self._undo = {}
        try:
            removed = self._merge(red, blue)
            touched = list(self._undo)
            after = sum(_node_ll(self.nodes[i].freq_through, self.nodes[i].freq_end,
                                 self.nodes[i].edge_freq) for i in touched if self.nodes[i].alive)
            snaps = self._undo
        finally:
            undo, self._undo = self._undo, None
            for i, snap in undo.items():
                self.nodes[i].restore(snap)
        before = sum(_node_ll(snap[0], snap[1], snap[3]) for snap in snaps.values())
        return (before - after) / max(1, len(removed))

    def stochastic_merge(self, red, blue) -> list:
        """Redirect blue's incoming edge to red and fold blue's subtree into it."""
        if self.nodes[blue].parent is None:
            raise ValueError("blue node must have exactly one incoming edge")
        self._undo = {}
        try:
            removed = self._merge(red, blue)
        except SafetyStateMismatch:
            for i, snap in self._undo.items():
                self.nodes[i].restore(snap)
            raise
        finally:
            self._undo = None
        return removed

    def to_pdfa(self) -> Pdfa:
        """Normalize frequencies into probabilities, states renumbered breadth first."""
        order = [self.initial]
        index = {self.initial: 0}
        for i in order:
            for sym in sorted(self.nodes[i].children):
                c = self.nodes[i].children[sym]
                if c not in index:
                    index[c] = len(order)
                    order.append(c)
        trans = []
        term = []
        for i in order:
            n = self.nodes[i]
            t = n.freq_through
            trans.append({sym: (index[c], n.edge_freq[sym] / t) for sym, c in n.children.items()})
            term.append(n.freq_end / t)
        names = tuple(f"t{i}" for i in order)
        return Pdfa(self.alphabet, tuple(trans), tuple(term), 0, names)


def build_fpta(demos: DemoSet, safety: Dfa | None = None) -> Fdfa:
    """Prefix tree with pass-through and end counts; ids follow shortlex order.

    With a safety DFA every node records the safety state reached by its
    prefix, and a demonstration that leaves the accepting region is rejected.
    """
    if safety is not None:
        live = safety.live_states()
        for trace in demos.distinct():
            q = safety.initial
            for pos, sym in enumerate(trace, start=1):
                q = safety.delta[q][sym]
                if q not in live:
                    raise UnsafeDemonstration(trace, pos)
            if q not in safety.accepting:
                raise UnsafeDemonstration(trace, len(trace))

    # collect prefixes and assign ids in shortlex order of access paths
    prefixes = {()}
    for trace in demos.distinct():
        for k in range(1, len(trace) + 1):
            prefixes.add(trace[:k])
    ordered = sorted(prefixes, key=lambda w: (len(w), w))
    ids = {w: i for i, w in enumerate(ordered)}
    nodes = [FptaNode(i, sources=frozenset({i})) for i in range(len(ordered))]
    for w, i in ids.items():
        if w:
            parent = ids[w[:-1]]
            nodes[parent].children[w[-1]] = i
            nodes[i].parent = parent
    for trace, count in demos.counts:
        for k in range(len(trace) + 1):
            nodes[ids[trace[:k]]].freq_through += count
            if k < len(trace):
                parent = nodes[ids[trace[:k]]]
                parent.edge_freq[trace[k]] = parent.edge_freq.get(trace[k], 0) + count
        nodes[ids[trace]].freq_end += count
    if safety is not None:
        for w in ordered:
            nodes[ids[w]].safety_state = safety.run(w)[-1]
    return Fdfa(demos.alphabet, nodes, safety)


def compatible(f: Fdfa, red: int, blue: int, params: MergeParams) -> bool:
    return _score(f, red, blue, params) < params.alpha


def _score(f, red, blue, params):
    if params.mode == "preprocess" and f.nodes[red].safety_state != f.nodes[blue].safety_state:
        return math.inf
    try:
        return f.merge_score(red, blue)
    except SafetyStateMismatch:
        return math.inf


def stochastic_merge(f: Fdfa, red: int, blue: int) -> Fdfa:
    f.stochastic_merge(red, blue)
    return f


def _pick_blue(f: Fdfa, params: MergeParams):
    blues = f.blue()
    if not blues:
        return None
    if params.blue_order == "id":
        return blues[0]
    return min(blues, key=lambda b: (-f.nodes[b].freq_through, b))


def run_edsm(f: Fdfa, params: MergeParams, log: list | None = None) -> Fdfa:
    """Red/blue loop on ``f`` in place."""
    while True:
        b = _pick_blue(f, params)
        if b is None:
            return f
        best = None
        for r in sorted(f.red):
            if params.mode == "preprocess" and f.nodes[r].safety_state != f.nodes[b].safety_state:
                if log is not None:
                    log.append(MergeEvent(r, b, math.nan, False, "safety-state"))
                continue
            s = _score(f, r, b, params)
            ok = s < params.alpha
            if log is not None:
                log.append(MergeEvent(r, b, s, ok))
            if ok and (best is None or s < best[0]):
                best = (s, r)
        if best is None:
            f.red.add(b)
            if log is not None:
                log.append(MergeEvent(b, b, math.nan, False, "promote"))
        else:
            if log is not None:
                log.append(MergeEvent(best[1], b, best[0], True, "apply"))
            f.stochastic_merge(best[1], b)


def edsm_learn(demos: DemoSet, params: MergeParams, safety: Dfa | None = None,
               log: list | None = None) -> Pdfa:
    if params.mode == "preprocess":
        if safety is None:
            raise ValueError("preprocess mode needs a safety DFA")
        f = build_fpta(demos, safety)
    else:
        f = build_fpta(demos)
    run_edsm(f, params, log)
    return f.to_pdfa()


def postprocess_learn(demos: DemoSet, params: MergeParams, safety: Dfa,
                      log: list | None = None) -> Pdfa:
    vanilla = MergeParams(params.alpha, "vanilla", params.blue_order)
    return product_with_safety(edsm_learn(demos, vanilla, None, log), safety)


def learn(demos: DemoSet, params: MergeParams, safety: Dfa | None = None,
          log: list | None = None) -> Pdfa:
    """Dispatch on ``params.mode``."""
    if params.mode == "postprocess":
        if safety is None:
            raise ValueError("postprocess mode needs a safety DFA")
        return postprocess_learn(demos, params, safety, log)
    return edsm_learn(demos, params, safety, log)


def l1_trace_error(truth: Pdfa, learned: Pdfa, probe: Iterable[Sequence[int]]) -> float:
    probe = [tuple(t) for t in probe]
    if not probe:
        raise ValueError("probe set must be nonempty")
    total = 0.0
    for t in probe:
        total += abs(trace_probability(truth, t).value - trace_probability(learned, t).value)
    return total / len(probe)
