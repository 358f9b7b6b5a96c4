
import pytest
from hypothesis import given, settings, strategies as st

from pdfasynth.automata import (Pdfa, language_empty_intersection, sample_traces,
                                trace_probability)
from pdfasynth.errors import UnsafeDemonstration
from pdfasynth.learning import (Fdfa, MergeParams, build_fpta, compatible, edsm_learn,
                                l1_trace_error, learn, postprocess_learn, run_edsm)
from pdfasynth.safety_spec import Dfa, build_violating_dfa, parse_safe_ltl, safety_dfa
from pdfasynth.scenarios import (CHARGE, CORAL_ALPHABET, CORAL_FORMULA, charge_demos,
                                 charge_formula, charge_safety, charge_truth, charge_violating)
from pdfasynth.symbols import Alphabet, DemoSet

ABC = Alphabet.of("a", "b", "c")
A, B, C = 1, 2, 4
ABC_DEMOS = DemoSet.from_traces(ABC, [(A, A, A), (A, A, A), (A, A, C), (A, C, B), (C, B, B)])


def node_at(f, path):
    i = f.initial
    for s in path:
        i = f.nodes[i].children[s]
    return f.nodes[i]


def test_fpta_frequencies():
    f = build_fpta(ABC_DEMOS)
    assert node_at(f, ()).freq_through == 5
    assert node_at(f, (A,)).freq_through == 4
    assert node_at(f, (A, A)).freq_through == 3
    assert node_at(f, (A, A, A)).freq_through == 2
    assert node_at(f, (A, A, A)).freq_end == 2
    assert f.n_states == 10


def test_fpta_ids_are_shortlex():
    f = build_fpta(ABC_DEMOS)
    assert [node_at(f, w).id for w in [(), (A,), (C,), (A, A), (A, C), (C, B)]] == [0, 1, 2, 3, 4, 5]


def test_fpta_frequency_conservation():
    f = build_fpta(ABC_DEMOS)
    for n in f.nodes:
        assert n.freq_through == n.freq_end + sum(f.nodes[c].freq_through for c in n.children.values())
        assert n.freq_through >= n.freq_end >= 0


def test_single_trace_chain():
    a = Alphabet.of("x", "y")
    f = build_fpta(DemoSet.from_traces(a, [(1, 2)]))
    assert f.n_states == 3
    assert [n.freq_end for n in f.nodes] == [0, 0, 1]


def test_unsafe_demo_position():
    safe = safety_dfa(parse_safe_ltl(CORAL_FORMULA, CORAL_ALPHABET))
    coral = CORAL_ALPHABET.symbol(["coral"])
    demos = DemoSet.from_traces(CORAL_ALPHABET, [(coral, coral)])
    with pytest.raises(UnsafeDemonstration) as info:
        build_fpta(demos, safe)
    assert info.value.position == 2


def test_fpta_safety_annotation():
    safe = charge_safety(3)
    f = build_fpta(charge_demos(), safe)
    for n in f.nodes:
        for sym, c in n.children.items():
            assert f.nodes[c].safety_state == safe.delta[n.safety_state][sym]


def test_identical_subtrees_score_zero():
    f = build_fpta(DemoSet.from_traces(ABC, [(A, B), (C, B)]))
    red, blue = node_at(f, (A,)).id, node_at(f, (C,)).id
    f.red.add(red)
    assert f.merge_score(red, blue) == 0.0
    assert compatible(f, red, blue, MergeParams(1e-6))


def test_preprocess_requires_equal_safety_state():
    safe = charge_safety(3)
    e, w = 0, CHARGE.symbol(["water"])
    demos = DemoSet.from_traces(CHARGE, [(e, CHARGE.symbol(["charge"])), (w, CHARGE.symbol(["carpet"]),
                                                                          CHARGE.symbol(["charge"]))])
    f = build_fpta(demos, safe)
    dry, wet = node_at(f, (e,)), node_at(f, (w,))
    assert dry.safety_state != wet.safety_state
    assert not compatible(f, dry.id, wet.id, MergeParams(1e9, "preprocess"))


def test_tentative_merge_leaves_tree_untouched():
    f = build_fpta(ABC_DEMOS)
    before = [n.snapshot() for n in f.nodes]
    f.merge_score(0, 1)
    assert [n.snapshot() for n in f.nodes] == before


def test_abc_merge_sequence():
    f = build_fpta(ABC_DEMOS)
    run_edsm(f, MergeParams(1.0))
    root = f.nodes[f.initial]
    assert root.edge_freq == {A: 4, C: 1}
    s1, s2 = root.children[A], root.children[C]
    assert f.nodes[s1].children[C] == s2
    assert sum(f.nodes[i].freq_end for i in f.alive_ids()) == 5


@pytest.mark.parametrize("alpha,states", [(0.1, 6), (1.0, 5), (2.0, 2), (8.0, 1)])
def test_alpha_controls_size(alpha, states):
    assert edsm_learn(ABC_DEMOS, MergeParams(alpha)).n_states == states


def test_merge_log_records_every_candidate():
    log = []
    edsm_learn(ABC_DEMOS, MergeParams(1.0), None, log)
    assert any(e.note == "apply" for e in log)
    assert any(e.note == "promote" for e in log)
    assert all(e.line().split()[0] in ("merge", "accept", "reject") for e in log)


def test_charge_vanilla_alpha4_is_unsafe():
    p = learn(charge_demos(), MergeParams(4.0))
    assert p.n_states == 2
    res = language_empty_intersection(p, charge_violating(10))
    assert not res.empty
    water, charge = CHARGE.symbol(["water"]), CHARGE.symbol(["charge"])
    assert res.witness == (water, charge)


def test_charge_vanilla_alpha04_is_safe():
    p = learn(charge_demos(), MergeParams(0.4))
    assert language_empty_intersection(p, charge_violating(10)).empty


@pytest.mark.parametrize("mode", ["preprocess", "postprocess"])
def test_charge_safe_modes(mode):
    p = learn(charge_demos(), MergeParams(4.0, mode), charge_safety(10))
    assert language_empty_intersection(p, charge_violating(10)).empty
    for t in charge_demos().distinct():
        assert trace_probability(p, t).value > 0


def test_postprocess_with_universal_equals_vanilla():
    demos = charge_demos()
    van = learn(demos, MergeParams(4.0))
    post = postprocess_learn(demos, MergeParams(4.0), Dfa.universal(CHARGE))
    for t in sample_traces(van, 200, 1):
        assert trace_probability(post, t).value == pytest.approx(trace_probability(van, t).value)


def test_tiny_corpus():
    demos = DemoSet.from_traces(CHARGE, [()])
    p = postprocess_learn(demos, MergeParams(1.0), charge_safety(3))
    assert p.n_states == 1 and p.term[0] == 1.0


def test_l1_examples():
    a = Alphabet.of("x")
    truth = Pdfa.from_edges(a, 2, {(0, 1): (1, 0.5)}, {0: 0.5, 1: 1.0})
    other = Pdfa.from_edges(a, 2, {(0, 1): (1, 0.4)}, {0: 0.6, 1: 1.0})
    assert l1_trace_error(truth, truth, [(), (1,)]) == 0
    assert l1_trace_error(truth, other, [(), (1,)]) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        l1_trace_error(truth, other, [])


def test_merge_params_validation():
    with pytest.raises(ValueError):
        MergeParams(0)
    with pytest.raises(ValueError):
        MergeParams(1, "sideways")


# -- properties over random corpora drawn from a safe generator -------------

SAFE3 = charge_safety(3)
BAD3 = build_violating_dfa(parse_safe_ltl(charge_formula(3), CHARGE))
TRUTH = charge_truth()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 150), st.integers(0, 10**6),
       st.sampled_from([0.1, 0.4, 1.0, 2.0, 4.0, 10.0]),
       st.sampled_from(["vanilla", "postprocess", "preprocess"]))
def test_learner_invariants(n, seed, alpha, mode):
    demos = DemoSet.from_traces(CHARGE, sample_traces(TRUTH, n, seed))
    params = MergeParams(alpha, mode)
    safe = None if mode == "vanilla" else SAFE3
    p = learn(demos, params, safe)
    # every demonstration keeps positive probability
    for t in demos.distinct():
        assert trace_probability(p, t).value > 0
    if mode != "vanilla":
        assert language_empty_intersection(p, BAD3).empty
    # bit-identical on a rerun
    assert learn(demos, params, safe) == p


def check_flow(f, n):
    """Counts are visit counts: through = end + outgoing, and the root adds the n starts."""
    alive = f.alive_ids()
    into_root = 0
    for i in alive:
        node = f.nodes[i]
        assert node.freq_through == node.freq_end + sum(node.edge_freq.values())
        into_root += sum(node.edge_freq[s] for s, c in node.children.items() if c == f.initial)
    assert f.nodes[f.initial].freq_through == n + into_root
    assert sum(f.nodes[i].freq_end for i in alive) == n


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 80), st.integers(0, 10**6), st.sampled_from([0.5, 2.0, 6.0]),
       st.sampled_from(["vanilla", "preprocess"]))
def test_merges_shrink_and_conserve_mass(n, seed, alpha, mode):
    demos = DemoSet.from_traces(CHARGE, sample_traces(TRUTH, n, seed))
    f = build_fpta(demos, SAFE3 if mode == "preprocess" else None)
    sizes = [f.n_states]
    original = Fdfa.stochastic_merge

    def spy(self, red, blue):
        out = original(self, red, blue)
        sizes.append(self.n_states)
        check_flow(self, n)
        if mode == "preprocess":
            for i in self.alive_ids():
                node = self.nodes[i]
                for sym, c in node.children.items():
                    assert self.nodes[c].safety_state == SAFE3.delta[node.safety_state][sym]
        return out

    Fdfa.stochastic_merge = spy
    try:
        run_edsm(f, MergeParams(alpha, mode))
    finally:
        Fdfa.stochastic_merge = original
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
