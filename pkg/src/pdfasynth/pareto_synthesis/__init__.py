"""Pareto-set algebra, value iteration and strategy synthesis on product games."""
from .kernel import BACKENDS, default_backend_name, get_backend
from .sets import (close, covers, dominates, in_upset, is_top, pareto_min, shift,
                   strictly_dominates, top, upset_intersection, upset_union, zero)
from .solver import (Episode, ParetoResult, RolloutReport, Strategy, StrategyNode, apply_fp,
                     compute_pareto_front, default_eps, extract_strategy, front_csv,
                     initial_value_map, simulate)

__all__ = [
    "BACKENDS", "default_backend_name", "get_backend",
    "close", "covers", "dominates", "in_upset", "is_top", "pareto_min", "shift",
    "strictly_dominates", "top", "upset_intersection", "upset_union", "zero",
    "Episode", "ParetoResult", "RolloutReport", "Strategy", "StrategyNode", "apply_fp",
    "compute_pareto_front", "default_eps", "extract_strategy", "front_csv",
    "initial_value_map", "simulate",
]
