import itertools

import pytest
from hypothesis import given, settings, strategies as st

from pdfasynth.errors import FormulaSyntaxError, NegationOnCompound, StateBlowup
from pdfasynth.safety_spec import (FALSE, TRUE, Dfa, SafeLtl, build_violating_dfa, canonical,
                                   complement_and_minimize, dfa_accepts, dfa_to_dot, dumps_dfa,
                                   equivalent, formula_progression, loads_dfa, minimize,
                                   parse_safe_ltl, safety_dfa)
from pdfasynth.scenarios import CHARGE, CORAL_ALPHABET, CORAL_FORMULA, shipwreck_task_dfa
from pdfasynth.symbols import Alphabet

AB = Alphabet.of("a", "b")


def traces(alphabet, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet.symbols(), repeat=n)


# -- oracle: weak finite-trace semantics, positions past the end are unconstrained


def weak(f, w, i=0):
    tag = f[0]
    if tag == "const":
        return f[1]
    if i >= len(w):
        return True
    if tag == "atom":
        return bool(w[i] & AB.symbol([f[1]]))
    if tag == "natom":
        return not w[i] & AB.symbol([f[1]])
    if tag == "and":
        return all(weak(c, w, i) for c in f[1])
    if tag == "or":
        return any(weak(c, w, i) for c in f[1])
    if tag == "X":
        return weak(f[1], w, i + 1)
    return all(weak(f[1], w, j) for j in range(i, len(w)))


leaves = st.sampled_from([("atom", "a"), ("atom", "b"), ("natom", "a"), ("natom", "b")])
formulas = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.tuples(st.just("and"), st.tuples(sub, sub)),
        st.tuples(st.just("or"), st.tuples(sub, sub)),
        st.tuples(st.just("X"), sub),
        st.tuples(st.just("G"), sub)),
    max_leaves=5)


@settings(max_examples=60, deadline=None)
@given(formulas)
def test_progression_sound_against_weak_semantics(f):
    bad = build_violating_dfa(SafeLtl(f, AB))
    for w in traces(AB, 5):
        if not weak(f, w):
            assert dfa_accepts(bad, w), w
        if dfa_accepts(bad, w):
            # a detected violation is already unavoidable one symbol later
            assert all(not weak(f, w + (s,)) for s in AB.symbols()), w


@settings(max_examples=60, deadline=None)
@given(formulas)
def test_dfa_matches_residual_chain(f):
    bad = build_violating_dfa(SafeLtl(f, AB))
    for w in traces(AB, 4):
        r, hit = canonical(f), canonical(f) == FALSE
        for s in w:
            r = formula_progression(r, s, AB)
            hit = hit or r == FALSE
        assert dfa_accepts(bad, w) == hit


@settings(max_examples=40, deadline=None)
@given(formulas)
def test_complement_partitions_traces(f):
    bad = build_violating_dfa(SafeLtl(f, AB))
    safe = complement_and_minimize(bad)
    assert safe.n_states <= bad.n_states
    for w in traces(AB, 5):
        assert dfa_accepts(bad, w) != dfa_accepts(safe, w)


dfas = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=n, max_size=n),
    st.sets(st.integers(0, n - 1))))


@settings(max_examples=100, deadline=None)
@given(dfas)
def test_minimize_language_and_minimality(spec):
    n, rows, acc = spec
    d = Dfa(Alphabet.of("p"), tuple(rows), 0, frozenset(acc))
    m = minimize(d)
    assert m.n_states <= n
    for w in traces(d.alphabet, 6):
        assert d.accepts(w) == m.accepts(w)
    # every pair of minimized states is distinguishable
    for p, q in itertools.combinations(range(m.n_states), 2):
        a = Dfa(m.alphabet, m.delta, p, m.accepting)
        b = Dfa(m.alphabet, m.delta, q, m.accepting)
        assert not equivalent(a, b)[0]


def test_complement_involution():
    phi = parse_safe_ltl("G(p -> X !p)", Alphabet.of("p"))
    d = build_violating_dfa(phi)
    dd = complement_and_minimize(complement_and_minimize(d))
    for w in traces(d.alphabet, 5):
        assert d.accepts(w) == dd.accepts(w)


def test_parse_coral_formula():
    phi = parse_safe_ltl(CORAL_FORMULA, CORAL_ALPHABET)
    expect = canonical(("G", ("or", (("natom", "coral"), ("X", ("natom", "coral"))))))
    assert canonical(phi.root) == expect


def test_visit_until_zero():
    phi = parse_safe_ltl("visit_until(!charge, carpet, 0)", CHARGE)
    assert phi.root == ("natom", "charge")


def test_visit_until_unrolls():
    phi = parse_safe_ltl("visit_until(!charge, carpet, 2)", CHARGE)
    # a & (b | X(a & (b | X a)))
    a, b = ("natom", "charge"), ("atom", "carpet")
    inner = ("and", (a, ("or", (b, ("X", a)))))
    expect = canonical(("and", (a, ("or", (b, ("X", inner))))))
    assert canonical(phi.root) == expect


def test_negation_on_compound():
    with pytest.raises(NegationOnCompound):
        parse_safe_ltl("G(!(a & b))", AB)


@pytest.mark.parametrize("text", ["G(a", "a &", "X", "a b", "visit_until(a, b)", "G(zzz)"])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_safe_ltl(text, AB)
    assert info.value.position >= 0


def test_unknown_atom_is_syntax_error():
    with pytest.raises(FormulaSyntaxError):
        parse_safe_ltl("G zzz", AB)


def test_progression_examples():
    lava = Alphabet.of("lava")
    assert formula_progression(("G", ("natom", "lava")), 1, lava) == FALSE
    assert formula_progression(TRUE, 1, lava) == TRUE
    phi = parse_safe_ltl(CORAL_FORMULA, CORAL_ALPHABET)
    coral = CORAL_ALPHABET.symbol(["coral"])
    r = formula_progression(canonical(phi.root), coral, CORAL_ALPHABET)
    assert r == canonical(("and", (("natom", "coral"), phi.root)))
    assert formula_progression(r, coral, CORAL_ALPHABET) == FALSE


def test_coral_violating_dfa():
    phi = parse_safe_ltl(CORAL_FORMULA, CORAL_ALPHABET)
    bad = build_violating_dfa(phi)
    assert bad.n_states == 3
    coral = CORAL_ALPHABET.symbol(["coral"])
    assert dfa_accepts(bad, (0, coral, coral))
    assert not dfa_accepts(bad, (coral, 0, coral))
    safe = safety_dfa(phi)
    assert safe.n_states == 3 and len(safe.accepting) == 2
    assert not dfa_accepts(safe, (coral, coral))


def test_globally_not_lava():
    bad = build_violating_dfa(parse_safe_ltl("G !lava", Alphabet.of("lava")))
    assert bad.n_states == 2
    assert bad.accepts((0, 0, 1)) and not bad.accepts((0, 0))


def test_charge_formula_sizes():
    from pdfasynth.scenarios import charge_formula
    phi = parse_safe_ltl(charge_formula(10), CHARGE)
    assert build_violating_dfa(phi).n_states == 1026
    safe = safety_dfa(phi)
    assert safe.n_states == 13 and len(safe.accepting) == 12


def test_state_cap():
    with pytest.raises(StateBlowup):
        build_violating_dfa(parse_safe_ltl("G(a -> X X X b)", AB), state_cap=3)


def test_table_cap():
    big = Alphabet(tuple(f"p{i}" for i in range(13)))
    with pytest.raises(ValueError):
        build_violating_dfa(parse_safe_ltl("G !p0", big))


def test_task_dfa_run():
    d = shipwreck_task_dfa()
    s, f = d.alphabet.symbol(["shipwreck"]), d.alphabet.symbol(["fish"])
    assert d.run((0, s, 0, f)) == [0, 0, 1, 1, 3]
    assert dfa_accepts(d, (0, s, 0, f))
    assert not dfa_accepts(d, ())


def test_bisimilar_states_merge():
    a = Alphabet.of("p")
    # states 1 and 2 are copies
    d = Dfa(a, ((1, 2), (1, 0), (2, 0)), 0, frozenset({1, 2}))
    m = minimize(d)
    assert m.n_states == 2
    assert equivalent(d, m)[0]


def test_equivalent_witness():
    a = Alphabet.of("p")
    d1 = Dfa(a, ((0, 0),), 0, frozenset({0}))
    d2 = Dfa(a, ((0, 1), (1, 1)), 0, frozenset({0}))
    same, w = equivalent(d1, d2)
    assert not same and d1.accepts(w) != d2.accepts(w)


def test_text_roundtrip_and_dot():
    safe = safety_dfa(parse_safe_ltl(CORAL_FORMULA, CORAL_ALPHABET))
    back = loads_dfa(dumps_dfa(safe))
    assert back == safe
    assert dfa_to_dot(safe).startswith("digraph")
