"""Command-line entry point: ``pdfasynth <subcommand> ...``.

Every subcommand writes its artifacts plus ``manifest.json`` (tool version,
input and output sha256 hashes, wall-clock per stage) into ``--out``.

Exit codes: 0 success, 2 invalid input or configuration, 3 a demonstration
violates the safety formula (pre-process mode), 4 no winning strategy.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .automata import (Pdfa, dumps_pdfa, language_empty_intersection, load_pdfa, pdfa_to_dot,
                       sample_traces)
from .errors import NoWinningStrategy, PdfaSynthError, UnsafeDemonstration
from .game import (augment, build_product, dumps_game, dumps_product, game_to_dot, loads_game,
                   loads_product, product_to_dot, FINISH_POLICIES, ZERO_PROB_POLICIES)
from .gridworld import build_gridworld, load_spec
from .learning import MODES, MergeParams, l1_trace_error, learn
from .pareto_synthesis import compute_pareto_front, extract_strategy, front_csv, simulate
from .pareto_synthesis.solver import ENV_POLICIES
from .safety_spec import (Dfa, build_violating_dfa, dfa_to_dot, dumps_dfa, parse_safe_ltl,
                          safety_dfa)
from .symbols import DemoSet, load_demos

log = logging.getLogger("pdfasynth")

EXIT_INPUT = 2
EXIT_UNSAFE_DEMO = 3
EXIT_NO_WIN = 4

BENCH_ALPHAS = (0.6, 5.0)
BENCH_SIZES = (0, 10, 50, 100, 500)


class ConfigError(PdfaSynthError):
    pass


# ---------------------------------------------------------------- config / io


@dataclass
class ExperimentConfig:
    out: Path
    demos: Path | None = None
    safety: str | None = None
    mode: str = "vanilla"
    alphas: tuple = (1.0,)
    pdfa: Path | None = None
    game: Path | None = None
    grid: Path | None = None
    product: Path | None = None
    point: str | None = None
    episodes: int = 1
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        for name in ("demos", "pdfa", "game", "grid", "product"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"--{name}: no such file: {p}")
        if not all(a > 0 for a in self.alphas):
            raise ConfigError("--alpha values must be > 0")
        if self.episodes < 1:
            raise ConfigError("--episodes must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"--mode must be one of {MODES}")
        return self


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def derive_seed(root: int, *labels) -> int:
    """Deterministic per-stage seed from the root seed and a label path."""
    key = "/".join([str(root)] + [str(x) for x in labels]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass
class RunManifest:
    command: str
    out: Path
    inputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def add_input(self, path):
        if path is not None:
            self.inputs[str(path)] = sha256_file(path)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.outputs[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return path

    def stage(self, name: str):
        return _Stage(self, name)

    def save(self) -> Path:
        data = {"tool": "pdfasynth", "version": __version__, "command": self.command,
                "inputs": self.inputs, "timings": self.timings, "outputs": self.outputs,
                "info": self.info}
        path = self.out / "manifest.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


class _Stage:
    def __init__(self, manifest, name):
        self.manifest, self.name = manifest, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.manifest.timings[self.name] = self.manifest.timings.get(self.name, 0.0) \
            + time.perf_counter() - self.t0
        return False


def _manifest(args, command) -> RunManifest:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return RunManifest(command, out)


def _parse_alphas(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--alpha: expected comma-separated numbers, got {text!r}") from None


def _safety_for(formula: str | None, alphabet):
    """(violating DFA, minimized safety DFA) for a formula, or (None, None)."""
    if formula is None:
        return None, None
    phi = parse_safe_ltl(formula, alphabet)
    return build_violating_dfa(phi), safety_dfa(phi)


def certificate_text(p: Pdfa, bad: Dfa) -> tuple:
    res = language_empty_intersection(p, bad)
    if res.empty:
        return True, "SAFE\n"
    return False, "UNSAFE\nwitness " + p.alphabet.render_trace(res.witness) + "\n"


# ------------------------------------------------------------------- learn


def cmd_learn(args) -> int:
    alphas = _parse_alphas(args.alpha)
    if len(alphas) != 1:
        raise ConfigError("learn takes a single --alpha")
    cfg = ExperimentConfig(Path(args.out), demos=Path(args.demos), safety=args.safety,
                           mode=args.mode, alphas=alphas).validate()
    man = _manifest(args, "learn")
    man.add_input(cfg.demos)
    man.info.update(mode=cfg.mode, alpha=alphas[0], safety=cfg.safety)
    demos = load_demos(cfg.demos)
    if cfg.mode != "vanilla" and cfg.safety is None:
        raise ConfigError(f"--mode {cfg.mode} needs --safety")
    with man.stage("safety"):
        bad, safe = _safety_for(cfg.safety, demos.alphabet)
    events = []
    try:
        with man.stage("learn"):
            p = learn(demos, MergeParams(alphas[0], cfg.mode, args.blue_order), safe, events)
    except UnsafeDemonstration as e:
        man.write("certificate.txt", f"UNSAFE-DEMONSTRATION\n{e}\n")
        man.save()
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNSAFE_DEMO
    man.write("pdfa.txt", dumps_pdfa(p))
    man.write("pdfa.dot", pdfa_to_dot(p))
    man.write("merge_log.txt", "".join(ev.line() + "\n" for ev in events))
    man.info["states"] = p.n_states
    verdict = "none"
    if bad is not None:
        _, text = certificate_text(p, bad)
        man.write("certificate.txt", text)
        verdict = text.splitlines()[0]
        man.info["certificate"] = verdict
    man.save()
    print(f"learned {p.n_states} states, certificate {verdict}")
    return 0


# -------------------------------------------------------------- safety-dfa


def cmd_safety_dfa(args) -> int:
    if args.demos:
        alphabet = load_demos(args.demos).alphabet
    elif args.alphabet:
        from .symbols import Alphabet
        alphabet = Alphabet(tuple(x.strip() for x in args.alphabet.split(",")))
    else:
        raise ConfigError("safety-dfa needs --alphabet or --demos")
    man = _manifest(args, "safety-dfa")
    man.add_input(args.demos)
    with man.stage("progression"):
        phi = parse_safe_ltl(args.safety, alphabet)
        bad = build_violating_dfa(phi)
    with man.stage("minimize"):
        safe = safety_dfa(phi)
    man.write("violating.dfa", dumps_dfa(bad))
    man.write("safety.dfa", dumps_dfa(safe))
    man.write("safety.dot", dfa_to_dot(safe))
    man.info.update(formula=args.safety, violating_states=bad.n_states, safety_states=safe.n_states)
    man.save()
    print(f"violating DFA {bad.n_states} states, safety DFA {safe.n_states} states")
    return 0


# -------------------------------------------------------- synthesize / simulate


def _load_product(args, man):
    """Product game from --product, or from --pdfa with --game / --grid."""
    sources = [x for x in (args.product, args.game, args.grid) if x]
    if len(sources) != 1:
        raise ConfigError("give exactly one of --product, --game, --grid")
    cfg = ExperimentConfig(Path(args.out), pdfa=_p(args.pdfa), game=_p(args.game),
                           grid=_p(args.grid), product=_p(args.product),
                           episodes=getattr(args, "episodes", 1)).validate()
    for p in (cfg.pdfa, cfg.game, cfg.grid, cfg.product):
        man.add_input(p)
    with man.stage("product"):
        if cfg.product:
            return loads_product(cfg.product.read_text(encoding="utf-8"))
        if cfg.pdfa is None:
            raise ConfigError("--game/--grid need --pdfa")
        pdfa = load_pdfa(cfg.pdfa)
        if cfg.grid:
            g = build_gridworld(load_spec(cfg.grid))
        else:
            g = loads_game(cfg.game.read_text(encoding="utf-8"))
        return build_product(augment(g), pdfa, finish_policy=args.finish_policy,
                             env_zero_prob=args.env_zero_prob)


def _p(x):
    return Path(x) if x else None


def _select_points(front, selector):
    pts = list(front)
    if selector is None:
        return pts
    if "," not in selector:
        try:
            i = int(selector)
        except ValueError:
            raise ConfigError(f"--point: expected an index or a vector, got {selector!r}") from None
        if not 0 <= i < len(pts):
            raise ConfigError(f"--point {i}: front has {len(pts)} points")
        return [pts[i]]
    try:
        vec = tuple(float(x) for x in selector.split(","))
    except ValueError:
        raise ConfigError(f"--point: bad vector {selector!r}") from None
    return [vec]


def _solve(args, man):
    pg = _load_product(args, man)
    man.info.update(product_states=pg.n_states, product_edges=pg.n_edges)
    with man.stage("front"):
        res = compute_pareto_front(pg, backend=args.backend)
    man.info.update(iterations=res.iterations, bound=res.bound, backend=res.backend)
    front = res.front()
    if not res.winning():
        raise NoWinningStrategy(f"no winning strategy from {pg.name(pg.initial)}")
    points = _select_points(front, args.point)
    strategies = []
    with man.stage("strategies"):
        for pt in points:
            strategies.append(extract_strategy(pg, res, pt))
    return pg, res, strategies


def cmd_synthesize(args) -> int:
    man = _manifest(args, "synthesize")
    pg, res, strategies = _solve(args, man)
    man.write("product.txt", dumps_product(pg))
    man.write("product.dot", product_to_dot(pg, values=res.values))
    man.write("front.csv", front_csv(pg, res.values, [pg.initial]))
    man.write("values.csv", front_csv(pg, res.values))
    for k, st in enumerate(strategies):
        man.write(f"strategy_{k}.txt", st.dumps())
    man.info["front"] = [list(p) for p in res.front()]
    man.save()
    print(f"front at {pg.name(pg.initial)}: "
          + " ".join("(" + ", ".join(f"{x:g}" for x in p) + ")" for p in res.front()))
    print("timings: " + ", ".join(f"{k} {v:.4f}s" for k, v in man.timings.items()))
    return 0


def cmd_simulate(args) -> int:
    if args.episodes < 1:
        raise ConfigError("--episodes must be >= 1")
    man = _manifest(args, "simulate")
    pg, res, strategies = _solve(args, man)
    script = args.script.split(",") if args.script else None
    rows = []
    with man.stage("simulate"):
        for k, st in enumerate(strategies):
            rep = simulate(pg, st, args.policy, args.episodes, derive_seed(args.seed, "simulate", k),
                           values=res.values, script=script)
            man.write(f"rollouts_{k}.csv", rep.to_csv())
            rows.append([k] + [repr(x) for x in st.point]
                        + [f"{rep.completion_rate:.6f}", f"{rep.dominance_rate:.6f}"]
                        + [repr(x) for x in rep.worst()])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = pg.dim
    w.writerow(["strategy"] + [f"p{i}" for i in range(dim)] + ["completion", "dominance"]
               + [f"worst{i}" for i in range(dim)])
    w.writerows(rows)
    man.write("summary.csv", buf.getvalue())
    man.info.update(policy=args.policy, episodes=args.episodes, seed=args.seed)
    man.save()
    sys.stdout.write(buf.getvalue())
    return 0


# -------------------------------------------------------------------- bench


def bench_cell(cell):
    """Learn one (mode, alpha, n) cell; failures are recorded, not raised."""
    truth, bad, safe, mode, alpha, n, seed, probe = cell
    row = {"mode": mode, "alpha": alpha, "n": n, "status": "ok", "reason": "",
           "l1": "", "states": "", "certificate": ""}
    if n == 0:
        row.update(status="skipped", reason="empty demonstration set")
        return row, 0.0
    t0 = time.perf_counter()
    try:
        demos = DemoSet.from_traces(truth.alphabet, sample_traces(truth, n, seed))
        p = learn(demos, MergeParams(alpha, mode), safe)
        row["l1"] = f"{l1_trace_error(truth, p, probe):.6e}"
        row["states"] = p.n_states
        row["certificate"] = "SAFE" if language_empty_intersection(p, bad).empty else "UNSAFE"
    except PdfaSynthError as e:
        row.update(status="failed", reason=f"{type(e).__name__}: {e}")
    return row, time.perf_counter() - t0


BENCH_FIELDS = ["mode", "alpha", "n", "status", "reason", "l1", "states", "certificate"]


def cmd_bench(args) -> int:
    man = _manifest(args, "bench")
    if args.truth:
        man.add_input(args.truth)
        truth = load_pdfa(args.truth)
        formula = args.safety
    else:
        from .scenarios import charge_formula, charge_truth
        truth = charge_truth()
        formula = args.safety or charge_formula(args.k)
    if formula is None:
        raise ConfigError("bench needs --safety with a custom --truth")
    alphas = _parse_alphas(args.alpha)
    if not all(a > 0 for a in alphas):
        raise ConfigError("--alpha values must be > 0")
    modes = tuple(args.modes.split(","))
    for m in modes:
        if m not in MODES:
            raise ConfigError(f"--modes: unknown mode {m!r}")
    try:
        sizes = tuple(int(x) for x in args.sizes.split(","))
    except ValueError:
        raise ConfigError("--sizes: expected comma-separated integers") from None
    if any(n < 0 for n in sizes):
        raise ConfigError("--sizes must be >= 0")
    with man.stage("safety"):
        bad, safe = _safety_for(formula, truth.alphabet)
    probe = sorted(set(sample_traces(truth, args.probe, derive_seed(args.seed, "probe"))))
    # the sample for a given n is shared by every mode and alpha
    cells = [(truth, bad, safe, m, a, n, derive_seed(args.seed, "sample", n), probe)
             for m in modes for a in alphas for n in sizes]
    with man.stage("cells"):
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                results = list(pool.map(bench_cell, cells))
        else:
            results = [bench_cell(c) for c in cells]
    buf = io.StringIO()
    w = csv.DictWriter(buf, BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    tbuf = io.StringIO()
    tw = csv.writer(tbuf, lineterminator="\n")
    tw.writerow(["mode", "alpha", "n", "seconds"])
    for row, secs in results:
        w.writerow(row)
        tw.writerow([row["mode"], row["alpha"], row["n"], f"{secs:.4f}"])
    man.write("bench.csv", buf.getvalue())
    man.write("bench_times.csv", tbuf.getvalue())
    man.info.update(formula=formula, seed=args.seed, probe=len(probe))
    man.save()
    sys.stdout.write(buf.getvalue())
    return 0


# --------------------------------------------------------- gridworld-export


def cmd_gridworld_export(args) -> int:
    if not Path(args.grid).is_file():
        raise ConfigError(f"--grid: no such file: {args.grid}")
    man = _manifest(args, "gridworld-export")
    man.add_input(args.grid)
    with man.stage("build"):
        g = build_gridworld(load_spec(args.grid))
    man.write("game.txt", dumps_game(g))
    man.write("game.dot", game_to_dot(g))
    man.info.update(states=g.n_states, edges=g.n_edges)
    man.save()
    print(f"{g.n_states} states, {g.n_edges} edges")
    return 0


# ------------------------------------------------------------------ parser


def _add_game_args(p):
    p.add_argument("--pdfa", help="learned PDFA file")
    p.add_argument("--game", help="game graph file")
    p.add_argument("--grid", help="gridworld description (YAML or JSON)")
    p.add_argument("--product", help="ready-made product game file")
    p.add_argument("--finish-policy", choices=FINISH_POLICIES, default="robot-only")
    p.add_argument("--env-zero-prob", choices=ZERO_PROB_POLICIES, default="omit")
    p.add_argument("--point", help="Pareto point index or comma-separated vector (default: all)")
    p.add_argument("--backend", choices=("python", "cython"), default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdfasynth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pdfasynth {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a PDFA from demonstrations")
    p.add_argument("--demos", required=True)
    p.add_argument("--safety", help="safe-LTL formula over the demo alphabet")
    p.add_argument("--mode", choices=MODES, default="vanilla")
    p.add_argument("--alpha", default="1.0")
    p.add_argument("--blue-order", choices=("frequency", "id"), default="frequency")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("safety-dfa", help="translate a safe-LTL formula into DFAs")
    p.add_argument("--safety", required=True)
    p.add_argument("--alphabet", help="comma-separated proposition names")
    p.add_argument("--demos", help="take the alphabet from a demo file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_safety_dfa)

    p = sub.add_parser("synthesize", help="Pareto front and strategies on a product game")
    _add_game_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="roll out synthesized strategies")
    _add_game_args(p)
    p.add_argument("--policy", choices=ENV_POLICIES, default="random")
    p.add_argument("--script", help="comma-separated environment actions (scripted policy)")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="learning error, size and time over modes, alpha, n")
    p.add_argument("--truth", help="ground-truth PDFA file (default: built-in charging task)")
    p.add_argument("--safety", help="safe-LTL formula (default: charging formula)")
    p.add_argument("--k", type=int, default=10, help="drying horizon of the charging formula")
    p.add_argument("--modes", default=",".join(MODES))
    p.add_argument("--alpha", default=",".join(str(a) for a in BENCH_ALPHAS))
    p.add_argument("--sizes", default=",".join(str(n) for n in BENCH_SIZES))
    p.add_argument("--probe", type=int, default=1000, help="traces sampled for the probe set")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gridworld-export", help="enumerate a gridworld into a game file")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gridworld_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NoWinningStrategy as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_WIN
    except (PdfaSynthError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
