import random
from fractions import Fraction

import pytest

from epsdist.modalities import ModalityId, evaluate
from epsdist.oracle import OracleCapExceededError
from epsdist.solvers import (
    NoPolynomialSolverError,
    WitnessQuery,
    brute_force_solve,
    checked_witness,
    solve,
)
from epsdist.systems import Rel2, SubDist, make_system
from epsdist.values import Value

from conftest import (
    ALL_FAMILIES,
    modality_set,
    rand_eps,
    rand_rel2,
    rand_system_pair,
)

V = lambda a, b=1: Value(Fraction(a, b))


def one_state_prob_query(eps, spoiler_pairs=()):
    left = make_system("markov_chain", ["x"], [SubDist({0: V(1)})])
    right = make_system("markov_chain", ["y"], [SubDist({0: V(9, 10)})])
    S = Rel2.from_pairs(1, 1, spoiler_pairs)
    return WitnessQuery(
        left.payload(0), right.payload(0), left, right, S, eps, (ModalityId("P"),)
    )


def test_prob_witness_found():
    q = one_state_prob_query(V(1, 20))
    w = solve(q)
    assert w is not None
    assert w.modality == ModalityId("P")
    assert w.A == frozenset({0}) and w.B == frozenset({0})
    assert brute_force_solve(q) is not None


def test_prob_witness_absent_at_larger_eps():
    q = one_state_prob_query(V(1, 10))
    assert solve(q) is None
    assert brute_force_solve(q) is None


def test_fuzzy_singleton_witness():
    from epsdist.systems import FuzzySet

    left = make_system("fuzzy_ts", ["x"], [FuzzySet({0: V(1)})])
    right = make_system("fuzzy_ts", ["y"], [FuzzySet({0: V(1, 2)})])
    q = WitnessQuery(
        left.payload(0),
        right.payload(0),
        left,
        right,
        Rel2.empty(1, 1),
        V(1, 4),
        (ModalityId("fdia"),),
    )
    w = solve(q)
    assert w is not None and w.A == frozenset({0})
    assert brute_force_solve(q) is not None


def test_convex_has_no_polynomial_solver():
    rng = random.Random(79)
    left, right = rand_system_pair(rng, "convex_mc", 2)
    q = WitnessQuery(
        left.payload(0),
        right.payload(0),
        left,
        right,
        Rel2.empty(left.n, right.n),
        V(0),
        (ModalityId("cdia"),),
    )
    with pytest.raises(NoPolynomialSolverError):
        solve(q)
    brute_force_solve(q)  # the fallback works


def test_brute_force_cap():
    rng = random.Random(83)
    left, right = rand_system_pair(rng, "markov_chain", 2)
    q = WitnessQuery(
        left.payload(0),
        right.payload(0),
        left,
        right,
        Rel2.empty(left.n, right.n),
        V(0),
        (ModalityId("P"),),
    )
    with pytest.raises(OracleCapExceededError):
        brute_force_solve(q, cap=1)


def _random_queries(rng, family, count, bisim_rate=0.5):
    for _ in range(count):
        left, right = rand_system_pair(rng, family, max_n=3)
        mods = modality_set(left, bisim=rng.random() < bisim_rate)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        S = rand_rel2(rng, left.n, right.n, p=rng.choice([0.0, 0.3, 0.7]))
        yield WitnessQuery(
            left.payload(x), right.payload(y), left, right, S, rand_eps(rng), mods
        )


@pytest.mark.parametrize("family", ALL_FAMILIES)
def test_existence_agrees_with_brute_force(family):
    rng = random.Random(sum(map(ord, family)))
    solver = brute_force_solve if family == "convex_mc" else solve
    for q in _random_queries(rng, family, 120):
        got = solver(q)
        want = brute_force_solve(q)
        assert (got is None) == (want is None)
        if got is not None:
            # the defining inequality re-validates under evaluate()
            va = evaluate(got.modality, got.A, q.left_payload, q.left_system)
            vb = evaluate(got.modality, got.B, q.right_payload, q.right_system)
            assert Fraction(vb) < Fraction(va) - q.eps


def test_image_choice_never_weakens_existence():
    # replaying any witness with B := R[A] stays a witness
    rng = random.Random(89)
    for family in ALL_FAMILIES:
        solver = brute_force_solve if family == "convex_mc" else solve
        for q in _random_queries(rng, family, 40):
            w = solver(q)
            if w is None:
                continue
            R = q.spoiler_set.complement()
            checked_witness(q, w.modality, w.A, R.image(w.A))


def test_metric_solver_checks_every_modality_label():
    # a modality whose label occurs in neither payload can still witness
    from epsdist.systems import EdgeSet, LabelMetric

    metric = LabelMetric.from_table(
        ["far", "near"], {("far", "near"): V(1, 8)}
    )
    left = make_system(
        "metric_ts", ["x"], [EdgeSet(frozenset({("near", 0)}))], metric
    )
    right = make_system("metric_ts", ["y"], [EdgeSet(frozenset())], metric)
    q = WitnessQuery(
        left.payload(0),
        right.payload(0),
        left,
        right,
        Rel2.full(1, 1),
        V(1, 2),
        (ModalityId("mdia", "far"),),
    )
    w = solve(q)
    want = brute_force_solve(q)
    assert (w is None) == (want is None)
    assert w is not None
