"""Learn safe PDFA task specifications from demonstrations and synthesize
Pareto-optimal strategies for them on turn-based games."""
from .automata import (Pdfa, TraceProbability, language_empty_intersection, product_with_safety,
                       sample_trace, sample_traces, trace_probability)
from .errors import PdfaSynthError
from .game import GameGraph, Play, ProductGame, augment, build_product, total_payoff
from .gridworld import build_gridworld
from .learning import (MergeParams, build_fpta, compatible, edsm_learn, l1_trace_error, learn,
                       postprocess_learn, stochastic_merge)
from .pareto_synthesis import (compute_pareto_front, dominates, extract_strategy, pareto_min,
                               simulate, upset_intersection, upset_union)
from .safety_spec import (Dfa, build_violating_dfa, complement_and_minimize, dfa_accepts,
                          formula_progression, parse_safe_ltl, safety_dfa)
from .symbols import Alphabet, DemoSet, load_demos, parse_symbol

__version__ = "0.1.0"
