"""Turn-based gridworld games built from a declarative description.

A description is a mapping (usually loaded from YAML or JSON)::

    rows: 4
    cols: 5
    observe: both            # or "after-robot"
    propositions: [shipwreck, fish]   # optional, fixes the alphabet order
    cells: {shipwreck: [[0, 4]]}
    obstacles: [[1, 1]]
    robot:
      start: [0, 0]
      steps: [1, 2]          # cardinal moves of these lengths
      stay: false
      channels: [energy]     # cost channel names
      step_cost: [2]         # per cell moved, per channel
    env:
      - name: fish
        proposition: fish
        start: [3, 2]
        region: [[3, 0], [3, 4]]   # inclusive rectangle corners
        steps: [1]
        stay: true

Labels: a cell proposition holds while the robot stands on that cell and an
agent proposition holds while the robot shares a cell with the agent. With
``observe: after-robot`` only states reached by a robot move are labeled.
Robot moves are clipped at the grid border; moves into obstacles are dropped.
"""
from __future__ import annotations

import itertools
import json
from pathlib import Path

from .errors import SpecError
from .game import ENV, ROBOT, GameGraph
from .symbols import Alphabet

DIRECTIONS = (("N", -1, 0), ("S", 1, 0), ("E", 0, 1), ("W", 0, -1))
OBSERVE = ("both", "after-robot")


def load_spec(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return json.loads(text)
    import yaml
    return yaml.safe_load(text)


def _cell(value, field, rows, cols):
    if not (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(x, int) for x in value)):
        raise SpecError(field, "expected a [row, col] pair of integers")
    r, c = value
    if not (0 <= r < rows and 0 <= c < cols):
        raise SpecError(field, f"cell {list(value)} is outside the {rows}x{cols} grid")
    return (r, c)


def _int_list(value, field, minimum=1):
    if not isinstance(value, (list, tuple)) or not all(isinstance(x, int) and x >= minimum for x in value):
        raise SpecError(field, f"expected a list of integers >= {minimum}")
    return tuple(value)


def _parse(spec):
    if not isinstance(spec, dict):
        raise SpecError("<root>", "expected a mapping")
    for key in ("rows", "cols"):
        if not isinstance(spec.get(key), int) or spec[key] < 1:
            raise SpecError(key, "expected a positive integer")
    rows, cols = spec["rows"], spec["cols"]
    observe = spec.get("observe", "both")
    if observe not in OBSERVE:
        raise SpecError("observe", f"expected one of {OBSERVE}")
    cells = {}
    for prop, where in (spec.get("cells") or {}).items():
        if not isinstance(where, list):
            raise SpecError(f"cells.{prop}", "expected a list of cells")
        cells[prop] = {_cell(c, f"cells.{prop}[{i}]", rows, cols) for i, c in enumerate(where)}
    obstacles = {_cell(c, f"obstacles[{i}]", rows, cols)
                 for i, c in enumerate(spec.get("obstacles") or [])}

    robot = spec.get("robot")
    if not isinstance(robot, dict):
        raise SpecError("robot", "expected a mapping")
    if "start" not in robot:
        raise SpecError("robot.start", "missing")
    r_start = _cell(robot["start"], "robot.start", rows, cols)
    if r_start in obstacles:
        raise SpecError("robot.start", "robot starts on an obstacle")
    r_steps = _int_list(robot.get("steps", [1]), "robot.steps")
    channels = robot.get("channels", ["energy"])
    if not isinstance(channels, list) or not channels:
        raise SpecError("robot.channels", "expected a nonempty list of names")
    step_cost = robot.get("step_cost", [2] * len(channels))
    if (not isinstance(step_cost, list) or len(step_cost) != len(channels)
            or not all(isinstance(x, (int, float)) and x >= 0 for x in step_cost)):
        raise SpecError("robot.step_cost", f"expected {len(channels)} nonnegative numbers")
    stay_cost = robot.get("stay_cost", [0] * len(channels))
    if not isinstance(stay_cost, list) or len(stay_cost) != len(channels):
        raise SpecError("robot.stay_cost", f"expected {len(channels)} nonnegative numbers")

    agents = []
    for i, a in enumerate(spec.get("env") or []):
        f = f"env[{i}]"
        if not isinstance(a, dict):
            raise SpecError(f, "expected a mapping")
        name = a.get("name", f"agent{i}")
        prop = a.get("proposition", name)
        start = _cell(a.get("start"), f"{f}.start", rows, cols)
        region = a.get("region")
        if region is None:
            lo, hi = (0, 0), (rows - 1, cols - 1)
        else:
            if not isinstance(region, list) or len(region) != 2:
                raise SpecError(f"{f}.region", "expected two corner cells")
            c1 = _cell(region[0], f"{f}.region[0]", rows, cols)
            c2 = _cell(region[1], f"{f}.region[1]", rows, cols)
            lo = (min(c1[0], c2[0]), min(c1[1], c2[1]))
            hi = (max(c1[0], c2[0]), max(c1[1], c2[1]))
        if not (lo[0] <= start[0] <= hi[0] and lo[1] <= start[1] <= hi[1]):
            raise SpecError(f"{f}.start", "agent starts outside its region")
        agents.append({"name": name, "prop": prop, "start": start, "lo": lo, "hi": hi,
                       "steps": _int_list(a.get("steps", [1]), f"{f}.steps"),
                       "stay": bool(a.get("stay", True))})

    used = list(cells) + [a["prop"] for a in agents if a["prop"] not in cells]
    declared = spec.get("propositions")
    if declared is None:
        props = list(dict.fromkeys(used))
    else:
        if not isinstance(declared, list):
            raise SpecError("propositions", "expected a list of names")
        missing = [p for p in used if p not in declared]
        if missing:
            raise SpecError("propositions", f"missing {missing}")
        props = list(declared)
    return dict(rows=rows, cols=cols, observe=observe, cells=cells, obstacles=obstacles,
                r_start=r_start, r_steps=r_steps, stay=bool(robot.get("stay", False)),
                step_cost=tuple(step_cost), stay_cost=tuple(stay_cost), agents=agents,
                alphabet=Alphabet(tuple(props)))


def _robot_moves(cfg, pos):
    rows, cols = cfg["rows"], cfg["cols"]
    out = []
    if cfg["stay"]:
        out.append(("stay", pos, cfg["stay_cost"]))
    for k in cfg["r_steps"]:
        for name, dr, dc in DIRECTIONS:
            r = min(max(pos[0] + dr * k, 0), rows - 1)
            c = min(max(pos[1] + dc * k, 0), cols - 1)
            if (r, c) in cfg["obstacles"]:
                continue
            cost = tuple(k * x for x in cfg["step_cost"])
            out.append((f"{name}{k}", (r, c), cost))
    return out


def _agent_moves(agent, pos, obstacles):
    out = []
    if agent["stay"]:
        out.append(("stay", pos))
    lo, hi = agent["lo"], agent["hi"]
    for k in agent["steps"]:
        for name, dr, dc in DIRECTIONS:
            r, c = pos[0] + dr * k, pos[1] + dc * k
            if lo[0] <= r <= hi[0] and lo[1] <= c <= hi[1] and (r, c) not in obstacles:
                out.append((f"{name}{k}", (r, c)))
    return out


def build_gridworld(spec: dict) -> GameGraph:
    """Enumerate the reachable turn-based states of a gridworld description."""
    cfg = _parse(spec)
    alphabet = cfg["alphabet"]
    agents = cfg["agents"]
    dim = len(cfg["step_cost"])
    zero = (0,) * dim

    def label(robot, envs, turn):
        if cfg["observe"] == "after-robot" and agents and turn == ROBOT:
            return 0
        sym = 0
        for prop, where in cfg["cells"].items():
            if robot in where:
                sym |= 1 << alphabet.index(prop)
        for a, pos in zip(agents, envs):
            if pos == robot:
                sym |= 1 << alphabet.index(a["prop"])
        return sym

    start = (cfg["r_start"], tuple(a["start"] for a in agents), ROBOT)
    index = {start: 0}
    order = [start]
    rows = []
    i = 0
    while i < len(order):
        robot, envs, turn = order[i]
        row = []
        if turn == ROBOT:
            nxt_turn = ENV if agents else ROBOT
            for act, dest, cost in _robot_moves(cfg, robot):
                row.append((act, (dest, envs, nxt_turn), cost))
        else:
            options = [_agent_moves(a, pos, cfg["obstacles"]) for a, pos in zip(agents, envs)]
            for combo in itertools.product(*options):
                act = "+".join(f"{a['name']}:{m}" for a, (m, _) in zip(agents, combo))
                row.append((act, (robot, tuple(p for _, p in combo), ROBOT), zero))
        resolved = []
        for act, st, cost in row:
            if st not in index:
                index[st] = len(order)
                order.append(st)
            resolved.append((act, index[st], cost))
        rows.append(tuple(resolved))
        i += 1

    def state_name(st):
        robot, envs, turn = st
        parts = [f"r{robot[0]}.{robot[1]}"]
        parts += [f"{a['name']}{p[0]}.{p[1]}" for a, p in zip(agents, envs)]
        parts.append("R" if turn == ROBOT else "E")
        return "|".join(parts)

    owner = tuple(turn for _, _, turn in order)
    labels = tuple(label(*st) for st in order)
    names = tuple(state_name(st) for st in order)
    return GameGraph(alphabet, owner, labels, tuple(rows), 0, names)
