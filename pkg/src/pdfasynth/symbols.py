"""Atomic propositions, symbols and demonstration traces.

A symbol is a subset of the proposition set and is stored as an ``int``
bitmask over the owning :class:`Alphabet`; a trace is a tuple of such ints.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyDemoSet, FormatError, MalformedSymbol, UnknownProposition

Symbol = int
Trace = tuple  # tuple[Symbol, ...]

MAX_PROPOSITIONS = 30
EMPTY_TRACE = "-"  # line marker for the zero-length trace
_SYMBOL_RE = re.compile(r"^\{([^{}]*)\}$")


@dataclass(frozen=True)
class Alphabet:
    propositions: tuple

    def __post_init__(self):
        props = tuple(self.propositions)
        object.__setattr__(self, "propositions", props)
        if len(props) > MAX_PROPOSITIONS:
            raise ValueError(f"at most {MAX_PROPOSITIONS} propositions are supported")
        if len(set(props)) != len(props):
            raise ValueError("proposition names must be unique")
        for p in props:
            if not p or any(ch.isspace() for ch in p) or any(ch in "{},#" for ch in p):
                raise ValueError(f"invalid proposition name {p!r}")

    @classmethod
    def of(cls, *names: str) -> "Alphabet":
        return cls(tuple(names))

    def __len__(self):
        return len(self.propositions)

    @property
    def size(self) -> int:
        """Number of symbols, i.e. ``2 ** len(self)``."""
        return 1 << len(self.propositions)

    def index(self, name: str) -> int:
        try:
            return self.propositions.index(name)
        except ValueError:
            raise UnknownProposition(name) from None

    def symbol(self, names: Iterable[str] = ()) -> Symbol:
        bits = 0
        for n in names:
            bits |= 1 << self.index(n)
        return bits

    def names(self, sym: Symbol) -> tuple:
        return tuple(p for i, p in enumerate(self.propositions) if sym >> i & 1)

    def contains(self, sym: Symbol, name: str) -> bool:
        return bool(sym >> self.index(name) & 1)

    def symbols(self) -> range:
        return range(self.size)

    def render(self, sym: Symbol, legend: Mapping[Symbol, str] | None = None) -> str:
        if legend is not None and sym in legend:
            return legend[sym]
        return "{" + ",".join(self.names(sym)) + "}"

    def render_trace(self, trace: Sequence[Symbol], legend=None) -> str:
        return " ".join(self.render(s, legend) for s in trace)

    def parse(self, text: str) -> Symbol:
        return parse_symbol(text, self)

    def parse_trace(self, text: str) -> Trace:
        return tuple(parse_symbol(tok, self) for tok in text.split())

    def header(self) -> str:
        return "alphabet: " + ",".join(self.propositions)


def parse_symbol(text: str, alphabet: Alphabet) -> Symbol:
    """Parse ``{p,q}`` into a bitmask; proposition names are case-sensitive."""
    m = _SYMBOL_RE.match(text.strip())
    if m is None:
        raise MalformedSymbol(text)
    body = m.group(1).strip()
    if not body:
        return 0
    bits = 0
    for part in body.split(","):
        name = part.strip()
        if not name:
            raise MalformedSymbol(text)
        bits |= 1 << alphabet.index(name)
    return bits


def parse_alphabet_header(line: str) -> Alphabet | None:
    line = line.strip()
    if not line.startswith("alphabet:"):
        return None
    body = line[len("alphabet:"):]
    names = [n.strip() for n in body.split(",") if n.strip()]
    return Alphabet(tuple(names))


@dataclass(frozen=True)
class DemoSet:
    """A multiset of demonstration traces over one alphabet."""

    alphabet: Alphabet
    counts: tuple = field(default=())  # sorted ((trace, multiplicity), ...)

    def __post_init__(self):
        if not self.counts:
            raise EmptyDemoSet("a demonstration set needs at least one trace")
        for _, c in self.counts:
            if c < 1:
                raise ValueError("multiplicities must be >= 1")

    @classmethod
    def from_traces(cls, alphabet: Alphabet, traces: Iterable[Sequence[Symbol]]) -> "DemoSet":
        counter = Counter(tuple(t) for t in traces)
        return cls(alphabet, tuple(sorted(counter.items())))

    @property
    def size(self) -> int:
        """Total number of demonstrations, counting multiplicity."""
        return sum(c for _, c in self.counts)

    def __len__(self):
        return self.size

    def __iter__(self):
        for trace, c in self.counts:
            for _ in range(c):
                yield trace

    def distinct(self) -> list:
        return [t for t, _ in self.counts]

    def multiplicity(self, trace: Sequence[Symbol]) -> int:
        return dict(self.counts).get(tuple(trace), 0)

    def dumps(self, legend=None) -> str:
        lines = [self.alphabet.header()]
        for trace in self:
            lines.append(self.alphabet.render_trace(trace) if trace else EMPTY_TRACE)
        return "\n".join(lines) + "\n"


def parse_demos(text: str, alphabet: Alphabet | None = None) -> DemoSet:
    traces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = parse_alphabet_header(line)
        if header is not None:
            if alphabet is None:
                alphabet = header
            elif header != alphabet:
                raise FormatError(f"declared alphabet {header.propositions} differs from "
                                  f"{alphabet.propositions}", lineno)
            continue
        if alphabet is None:
            raise FormatError("trace before any 'alphabet:' header", lineno)
        trace = []
        if line == EMPTY_TRACE:
            traces.append(())
            continue
        col = 1
        for tok in raw.split():
            col = raw.index(tok, col - 1) + 1
            try:
                trace.append(parse_symbol(tok, alphabet))
            except UnknownProposition as exc:
                raise UnknownProposition(exc.name, lineno, col) from None
            except MalformedSymbol:
                raise MalformedSymbol(tok, lineno, col) from None
            col += len(tok)
        traces.append(tuple(trace))
    if alphabet is None or not traces:
        raise EmptyDemoSet("no demonstrations found")
    return DemoSet.from_traces(alphabet, traces)


def load_demos(path, alphabet: Alphabet | None = None) -> DemoSet:
    """Read a trace file: one trace per line, whitespace separated symbols.

    Blank lines and ``#`` comments are skipped. An ``alphabet: p1,p2`` header
    declares the propositions when ``alphabet`` is not given.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_demos(text, alphabet)


def write_demos(path, demos: DemoSet) -> None:
    Path(path).write_text(demos.dumps(), encoding="utf-8")
