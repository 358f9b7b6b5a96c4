"""Small worked scenarios used by the tests, the benchmarks and the CLI."""
from __future__ import annotations

from .automata import Pdfa
from .safety_spec import Dfa, parse_safe_ltl, safety_dfa
from .symbols import Alphabet, DemoSet

# -- shipwreck / fish --------------------------------------------------------

SHIP_FISH = Alphabet.of("shipwreck", "fish")
CORAL_ALPHABET = Alphabet.of("shipwreck", "fish", "coral")


def shipwreck_task_dfa() -> Dfa:
    """Visit the shipwreck and see a fish, in either order."""
    a = SHIP_FISH
    e, s, f = 0, a.symbol(["shipwreck"]), a.symbol(["fish"])
    edges = {(0, e): 0, (0, s): 1, (0, f): 2,
             (1, e): 1, (1, s): 1, (1, f): 3,
             (2, e): 2, (2, f): 2, (2, s): 3}
    for sym in a.symbols():
        edges[(3, sym)] = 3
    return Dfa.from_partial(a, 4, edges, 0, {3}, ("q0", "q1", "q2", "q3"))


def shipwreck_pdfa() -> Pdfa:
    a = SHIP_FISH
    e, s, f = 0, a.symbol(["shipwreck"]), a.symbol(["fish"])
    edges = {(0, e): (0, 0.8), (0, s): (1, 0.15), (0, f): (2, 0.05),
             (1, e): (1, 0.8), (1, f): (3, 0.2),
             (2, e): (2, 0.8), (2, s): (3, 0.2)}
    return Pdfa.from_edges(a, 4, edges, {3: 1.0}, 0, ("q0", "q1", "q2", "q3"))


def ship_fish_truth() -> Pdfa:
    """Ground truth for the order-sensitive learning experiment."""
    a = SHIP_FISH
    e, s, f = 0, a.symbol(["shipwreck"]), a.symbol(["fish"])
    edges = {(0, e): (0, 0.5), (0, s): (1, 0.4), (0, f): (2, 0.1),
             (1, e): (1, 0.5), (1, f): (3, 0.5),
             (2, e): (2, 0.5), (2, s): (3, 0.5)}
    return Pdfa.from_edges(a, 4, edges, {3: 1.0}, 0, ("q0", "q1", "q2", "q3"))


CORAL_FORMULA = "G(coral -> X !coral)"

# -- charging with a wet-floor rule ------------------------------------------

CHARGE = Alphabet.of("lava", "water", "carpet", "charge")
CHARGE_LEGEND = {0: "e", 2: "w", 4: "c", 8: "g", 1: "l"}
CHARGE_FORMULA = "G !lava & G(water -> X visit_until(!charge, carpet, {k}))"


def charge_formula(k: int = 10) -> str:
    return CHARGE_FORMULA.format(k=k)


def charge_safety(k: int = 10) -> Dfa:
    return safety_dfa(parse_safe_ltl(charge_formula(k), CHARGE))


def charge_violating(k: int = 10) -> Dfa:
    return charge_safety(k).complement()


def charge_demos() -> DemoSet:
    """Five demonstrations of reaching the charger, drying on carpet after water."""
    lines = [
        "e e e e e g",
        "e e c e g",
        "e w e e c e g",
        "e w w e c c e g",
        "e e e g",
    ]
    inv = {v: k for k, v in CHARGE_LEGEND.items()}
    traces = [tuple(inv[tok] for tok in line.split()) for line in lines]
    return DemoSet.from_traces(CHARGE, traces)


def charge_truth() -> Pdfa:
    """Safe generator for the charging task (wet state cannot charge before carpet)."""
    e, w, c, g = 0, 2, 4, 8
    # q0 dry, q1 wet, q2 done
    edges = {(0, e): (0, 0.55), (0, c): (0, 0.1), (0, w): (1, 0.15), (0, g): (2, 0.2),
             (1, e): (1, 0.4), (1, w): (1, 0.2), (1, c): (0, 0.4)}
    return Pdfa.from_edges(CHARGE, 3, edges, {2: 1.0}, 0, ("dry", "wet", "done"))


# -- single observation chain --------------------------------------------------

OBS = Alphabet.of("o1")


def obs_pdfa() -> Pdfa:
    """Two-state PDFA: wait on silence, finish once ``o1`` was observed."""
    edges = {(0, 0): (0, 0.6), (0, 1): (1, 0.4)}
    return Pdfa.from_edges(OBS, 2, edges, {1: 1.0}, 0, ("q0", "q1"))


def obs_chain_game() -> "GameGraph":
    """Three-step corridor: move east twice, the last cell shows ``o1``."""
    from .game import ROBOT, GameGraph
    o1 = OBS.symbol(["o1"])
    edges = (
        (("E", 1, (1,)),),
        (("E", 2, (1,)),),
        (("wait", 2, (1,)),),
    )
    return GameGraph(OBS, (ROBOT, ROBOT, ROBOT), (0, 0, o1), edges, 0, ("s0", "s1", "s2"))


# -- hand-built product game with a two-point front -----------------------------


def two_point_product():
    """Product game whose initial front is {(5, 10), (10, 5)}."""
    from .game import ENV, ROBOT, TERMINAL, ProductGame
    names = ("(s_0,q0)", "(s0,q0)", "(s1,q0)", "(s2,q0)", "(s3,q0)", "(s4,q0)", "(s5,q0)",
             "(s6,q0)", "(s7,q0)", "(s8,q0)", "(s9,q1)", "s_t")
    owner = (ROBOT, ROBOT, ENV, ROBOT, ROBOT, ENV, ENV, ENV, ENV, ENV, ROBOT, TERMINAL)
    z = (0, 0)
    edges = (
        (("go", 1, z),),
        (("go", 2, z),),
        (("up", 3, z), ("down", 4, z)),
        (("to_s4", 5, z), ("to_s5", 6, (5, 5)), ("to_s6", 7, (5, 5))),
        (("to_s7", 8, (10, 1)), ("to_s8", 9, (1, 10))),
        (("stay", 5, z), ("go", 10, z)),
        (("go", 10, z),),
        (("go", 10, z),),
        (("go", 10, z),),
        (("go", 10, z),),
        (("finish", 11, z),),
        (),
    )
    return ProductGame(owner, edges, 0, 11, names)


# -- fish and shipwreck gridworld ---------------------------------------------

FISH_GRID = {
    "rows": 3,
    "cols": 5,
    "observe": "after-robot",
    "propositions": ["shipwreck", "fish"],
    "cells": {"shipwreck": [[0, 4]]},
    "robot": {"start": [1, 0], "steps": [1, 2], "channels": ["energy"], "step_cost": [1]},
    "env": [{"name": "fish", "proposition": "fish", "start": [2, 2],
             "region": [[2, 0], [2, 4]], "steps": [1], "stay": True}],
}
FISH_FINISH_POLICY = "any-state"


def fish_product():
    from .game import augment, build_product
    from .gridworld import build_gridworld
    g = augment(build_gridworld(FISH_GRID))
    return build_product(g, ship_fish_truth(), finish_policy=FISH_FINISH_POLICY)
