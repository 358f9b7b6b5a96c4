import math

import pytest
from hypothesis import given, settings, strategies as st

from pdfasynth.errors import DimensionMismatch, PointNotAchievable
from pdfasynth.game import ROBOT, TERMINAL, ProductGame
from pdfasynth.pareto_synthesis import (BACKENDS, apply_fp, compute_pareto_front, dominates,
                                        extract_strategy, front_csv, in_upset,
                                        initial_value_map, pareto_min, simulate,
                                        strictly_dominates, upset_intersection, upset_union)
from pdfasynth.scenarios import fish_product, two_point_product

from game_oracles import all_plays, oracle, product_games

INF = math.inf
TOP = (INF, INF)


# -- Pareto-set algebra -------------------------------------------------------


def test_dominance_examples():
    assert dominates((5, 5), (5, 10))
    assert not dominates((5, 10), (10, 5))
    assert dominates((3, 3), (3, 3))
    assert dominates((1, 2), TOP)
    assert strictly_dominates((1, 1), (2, 2)) and not strictly_dominates((1, 2), (2, 2))
    with pytest.raises(DimensionMismatch):
        dominates((1,), (1, 2))


def test_pareto_min_examples():
    assert pareto_min([(5, 5), (5, 10), (10, 1), TOP]) == ((5, 5), (10, 1))
    assert pareto_min([]) == ()
    assert pareto_min([(1, 10), (10, 1)]) == ((1, 10), (10, 1))
    assert pareto_min([(2, 2), (2, 2)]) == ((2, 2),)
    assert pareto_min([(1, INF), (3, 3)]) == ((3, 3),)


def test_union_intersection_examples():
    assert upset_union([TOP], [(5, 5)]) == ((5, 5),)
    assert upset_union([(1, 10)], [(10, 1)]) == ((1, 10), (10, 1))
    assert upset_intersection([(5, 5)], [(1, 10), (10, 1)]) == ((5, 10), (10, 5))
    assert upset_intersection([(3, 4)], [(0, 0)]) == ((3, 4),)
    assert upset_intersection([(3, 4)], [TOP]) == (TOP,)


vec = st.tuples(st.integers(0, 6), st.integers(0, 6))
antichain = st.lists(vec, min_size=1, max_size=4).map(pareto_min)


@settings(max_examples=150, deadline=None)
@given(antichain, antichain, antichain, st.lists(vec, min_size=10, max_size=10))
def test_upset_algebra_laws(a, b, c, probes):
    U, I = upset_union, upset_intersection
    for x in (a, b, c):
        assert pareto_min(x) == x
    assert U(a, b) == U(b, a) and I(a, b) == I(b, a)
    assert U(U(a, b), c) == U(a, U(b, c)) and I(I(a, b), c) == I(a, I(b, c))
    assert U(a, a) == a and I(a, a) == a
    lhs, rhs = I(a, U(b, c)), U(I(a, b), I(a, c))
    for v in probes:
        ina, inb, inc = (in_upset(v, x) for x in (a, b, c))
        assert in_upset(v, U(a, b)) == (ina or inb)
        assert in_upset(v, I(a, b)) == (ina and inb)
        assert in_upset(v, lhs) == in_upset(v, rhs)


@settings(max_examples=100, deadline=None)
@given(st.lists(vec, max_size=8))
def test_antichain_invariant(points):
    out = pareto_min(points)
    for p in out:
        for q in out:
            assert p == q or not dominates(p, q)
    assert list(out) == sorted(out)
    for p in points:
        assert any(dominates(q, p) for q in out)


# -- worked example with two trade-off points --------------------------------


def by_name(pg, res):
    return {pg.name(s): set(res.values[s]) for s in range(pg.n_states)}


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_two_point_front(backend):
    pg = two_point_product()
    res = compute_pareto_front(pg, backend=backend)
    v = by_name(pg, res)
    assert v["(s_0,q0)"] == {(5, 10), (10, 5)}
    assert v["(s2,q0)"] == {(5, 5)}
    assert v["(s3,q0)"] == {(1, 10), (10, 1)}
    assert v["(s4,q0)"] == {TOP}
    assert v["(s9,q1)"] == {(0, 0)}
    assert res.iterations <= res.bound


def test_first_backup_step():
    pg = two_point_product()
    u1 = apply_fp(pg, initial_value_map_sets(pg))
    assert u1[pg.index("(s9,q1)")] == ((0, 0),)
    assert u1[pg.index("(s4,q0)")] == (TOP,)


def initial_value_map_sets(pg):
    return [((0, 0),) if o == TERMINAL else (TOP,) for o in pg.owner]


@pytest.mark.parametrize("point,choice", [((5, 10), "to_s8"), ((10, 5), "to_s7")])
def test_two_point_strategies(point, choice):
    pg = two_point_product()
    res = compute_pareto_front(pg)
    strat = extract_strategy(pg, res, point)
    assert strat.choice()[pg.index("(s3,q0)")] == choice
    assert strat.is_acyclic()
    for payoff in all_plays(pg, strat):
        assert dominates(payoff, point)
    text = strat.dumps()
    assert text.startswith("point 5 10" if point == (5, 10) else "point 10 5")
    assert " do " in text and " budget " in text


def test_point_not_achievable():
    pg = two_point_product()
    res = compute_pareto_front(pg)
    with pytest.raises(PointNotAchievable):
        extract_strategy(pg, res, (4, 4))


def test_unreachable_terminal():
    pg = ProductGame((ROBOT, ROBOT, TERMINAL), ((("a", 1, (1, 1)),), (("b", 0, (1, 1)),), ()), 0, 2)
    res = compute_pareto_front(pg)
    assert res.front() == (TOP,) and not res.winning()


def test_single_edge():
    pg = ProductGame((ROBOT, TERMINAL), ((("finish", 1, (3, 0.5)),), ()), 0, 1)
    assert compute_pareto_front(pg).front() == ((3, 0.5),)


def test_chain_strategy_is_the_path():
    pg = ProductGame((ROBOT, ROBOT, TERMINAL),
                     ((("a", 1, (1, 0)),), (("b", 2, (0, 1)),), ()), 0, 2)
    res = compute_pareto_front(pg)
    strat = extract_strategy(pg, res, (1, 1))
    assert [(s, a) for s, a, _ in strat.reachable_edges()] == [(0, "a"), (1, "b")]


def test_front_csv():
    pg = two_point_product()
    res = compute_pareto_front(pg)
    lines = front_csv(pg, res.values, [pg.initial]).splitlines()
    assert lines[0] == "state,name,point,c0,c1"
    assert len(lines) == 3


# -- oracle equivalence and strategy soundness on random games ----------------


@settings(max_examples=200, deadline=None)
@given(product_games())
def test_matches_unrolled_oracle(pg):
    res = compute_pareto_front(pg)
    assert res.iterations <= res.bound
    expect = oracle(pg, pg.n_states)
    for s in range(pg.n_states):
        assert frozenset(res.values[s]) == expect[s], pg.name(s)


@settings(max_examples=200, deadline=None)
@given(product_games())
def test_strategies_sound_against_every_environment(pg):
    res = compute_pareto_front(pg)
    if not res.winning():
        return
    for point in res.front():
        strat = extract_strategy(pg, res, point)
        assert strat.is_acyclic()
        for payoff in all_plays(pg, strat):
            assert dominates(payoff, point)


@settings(max_examples=100, deadline=None)
@given(product_games())
def test_backends_identical(pg):
    results = {name: compute_pareto_front(pg, backend=name) for name in BACKENDS}
    ref = results["python"]
    for res in results.values():
        assert res.iterations == ref.iterations
        for k in range(ref.n_levels):
            assert res.level(k) == ref.level(k)


@settings(max_examples=100, deadline=None)
@given(product_games())
def test_levels_monotone(pg):
    res = compute_pareto_front(pg)
    for k in range(1, res.n_levels):
        for s in range(pg.n_states):
            assert all(in_upset(p, res.level(k)[s]) for p in res.level(k - 1)[s])


def test_initial_value_map():
    pg = two_point_product()
    u = initial_value_map(pg)
    assert u == initial_value_map_sets(pg)
    assert u[pg.terminal] == ((0, 0),)


def test_backends_identical_on_gridworld():
    pg = fish_product()
    fronts = [compute_pareto_front(pg, backend=b).values for b in BACKENDS]
    assert all(f == fronts[0] for f in fronts)


# -- rollouts ---------------------------------------------------------------


def test_random_rollouts_on_gridworld():
    pg = fish_product()
    res = compute_pareto_front(pg)
    assert len(res.front()) >= 2
    for k, point in enumerate(res.front()):
        rep = simulate(pg, extract_strategy(pg, res, point), "random", 200, seed=k)
        assert rep.completion_rate == 1.0 and rep.dominance_rate == 1.0


def test_adversarial_rollout_dominated():
    pg = fish_product()
    res = compute_pareto_front(pg)
    for point in res.front():
        strat = extract_strategy(pg, res, point)
        for comp in (0, 1):
            rep = simulate(pg, strat, "adversarial-greedy", 1, values=res.values, component=comp)
            assert dominates(rep.worst(), point, 1e-9)


def test_scripted_rollout_is_one_play():
    pg = two_point_product()
    res = compute_pareto_front(pg)
    strat = extract_strategy(pg, res, (5, 10))
    a = simulate(pg, strat, "scripted", 3, script=["up", "go"])
    assert len({e.states for e in a.episodes}) == 1
    assert a.episodes[0].payoff == (5, 5)
    assert a.to_csv() == simulate(pg, strat, "scripted", 3, script=["up", "go"]).to_csv()


def test_simulate_validation():
    pg = two_point_product()
    res = compute_pareto_front(pg)
    strat = extract_strategy(pg, res, (5, 10))
    with pytest.raises(ValueError):
        simulate(pg, strat, "random", 0)
    with pytest.raises(ValueError):
        simulate(pg, strat, "psychic", 1)
