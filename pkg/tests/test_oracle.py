import random
from fractions import Fraction

import pytest

from epsdist.modalities import ModalityId, evaluate, sugeno_evaluate
from epsdist.oracle import (
    OracleCapExceededError,
    exact_distance,
    exact_lax,
    greatest_simulation,
    kantorovich,
    minimal_preserved_g,
)
from epsdist.systems import (
    EdgeSet,
    LabelMetric,
    Rel2,
    VRel,
    load_system,
    make_system,
)
from epsdist.values import ZERO, Value, join, meet, truncated_sub

from conftest import (
    ALL_FAMILIES,
    modality_set,
    rand_eps,
    rand_system_pair,
    rand_value,
    rand_vrel,
)

V = lambda a, b=1: Value(Fraction(a, b))


def loops():
    full = load_system(
        {"type": "markov_chain", "states": ["x"], "transitions": {"x": {"x": "1"}}}
    )
    nine = load_system(
        {"type": "markov_chain", "states": ["y"], "transitions": {"y": {"y": "9/10"}}}
    )
    return full, nine


def test_greatest_simulation_examples():
    left, right = loops()
    mods = (ModalityId("P"),)
    assert list(greatest_simulation(left, right, mods, V(1, 10)).pairs()) == [(0, 0)]
    assert greatest_simulation(left, right, mods, V(1, 20)).count() == 0
    assert greatest_simulation(left, right, mods, V(1)) == Rel2.full(1, 1)
    # identical systems at eps = 0 contain the identity
    rng = random.Random(127)
    for family in ALL_FAMILIES:
        sys_, _ = rand_system_pair(rng, family, 3)
        rel = greatest_simulation(sys_, sys_, modality_set(sys_), ZERO)
        for x in range(sys_.n):
            assert rel.has(x, x)


def test_cap_enforced():
    rng = random.Random(131)
    left, right = rand_system_pair(rng, "markov_chain", 3)
    with pytest.raises(OracleCapExceededError):
        greatest_simulation(left, right, modality_set(left), ZERO, cap=1)


def test_exact_lax_identity_case():
    left, _ = loops()
    mods = (ModalityId("P"),)
    r = VRel.constant(1, 1, ZERO)
    assert exact_lax(r, left.payload(0), left.payload(0), left, left, mods) == ZERO


def test_exact_lax_interval_cases():
    left, right = loops()
    mods = (ModalityId("P"),)
    zero_rel = VRel.constant(1, 1, ZERO)
    # with the full cut available from eps = 0 on, the deficit 1/10 decides
    assert exact_lax(zero_rel, left.payload(0), right.payload(0), left, right, mods) == V(1, 10)
    # with r constant 1 the cut only fills at eps = 1, which then is the value
    one_rel = VRel.constant(1, 1, V(1))
    assert exact_lax(one_rel, left.payload(0), right.payload(0), left, right, mods) == V(1)
    # intermediate: the cut fills at 1/4 and the deficit 1/10 is below it
    quarter = VRel.constant(1, 1, V(1, 4))
    assert exact_lax(quarter, left.payload(0), right.payload(0), left, right, mods) == V(1, 4)


def test_exact_lax_feasibility_characterization():
    # exact_lax(r) <= eps iff the cut condition holds at some eps' <= eps
    rng = random.Random(137)
    for _ in range(60):
        family = rng.choice(("markov_chain", "fuzzy_ts"))
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left, bisim=rng.random() < 0.5)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        a, b = left.payload(x), right.payload(y)
        r = rand_vrel(rng, left.n, right.n)
        got = exact_lax(r, a, b, left, right, mods)

        def holds_at(eps):
            cut = r.cut(eps)
            for m in mods:
                for A in _subsets(range(left.n)):
                    va = evaluate(m, A, a, left)
                    vb = evaluate(m, cut.image(A), b, right)
                    if Fraction(vb) < Fraction(va) - eps:
                        return False
            return True

        grid = sorted({got, *r.distinct_values(), V(0), V(1), rand_eps(rng)})
        for eps in grid:
            feasible_below = any(holds_at(e) for e in grid if e <= eps)
            assert (got <= eps) == feasible_below


def _subsets(xs):
    xs = list(xs)
    out = [frozenset()]
    for x in xs:
        out += [s | {x} for s in out]
    return out


def test_exact_distance_worked_example():
    left, right = loops()
    mods = (ModalityId("P"),)
    d = exact_distance(left, right, mods, cross_check=True)
    assert d.at(0, 0) == V(1, 10)


def test_exact_distance_reflexive_and_symmetric():
    rng = random.Random(139)
    for _ in range(15):
        family = rng.choice(("markov_chain", "fuzzy_ts", "gpts"))
        sys_, _ = rand_system_pair(rng, family, 3)
        mods = modality_set(sys_)
        d = exact_distance(sys_, sys_, mods)
        for x in range(sys_.n):
            assert d.at(x, x) == ZERO
        # dual closure makes the self-distance matrix symmetric
        d2 = exact_distance(sys_, sys_, modality_set(sys_, bisim=True))
        for x in range(sys_.n):
            for y in range(sys_.n):
                assert d2.at(x, y) == d2.at(y, x)


def test_exact_distance_cross_checks_against_game():
    rng = random.Random(149)
    for _ in range(12):
        family = rng.choice(ALL_FAMILIES)
        left, right = rand_system_pair(rng, family, 2)
        mods = modality_set(left, bisim=rng.random() < 0.5)
        exact_distance(left, right, mods, cross_check=True)  # raises on mismatch


def test_kantorovich_examples():
    left, right = loops()
    mods = (ModalityId("P"),)
    r0 = VRel.constant(1, 1, ZERO)
    assert kantorovich(r0, left.payload(0), left.payload(0), left, left, mods) == ZERO
    assert kantorovich(r0, left.payload(0), right.payload(0), left, right, mods) == V(1, 10)
    r1 = VRel.constant(1, 1, V(1))
    assert kantorovich(r1, left.payload(0), right.payload(0), left, right, mods) == V(1)


def test_kantorovich_equals_exact_lax():
    rng = random.Random(151)
    for _ in range(50):
        family = rng.choice(ALL_FAMILIES)
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left, bisim=rng.random() < 0.5)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        a, b = left.payload(x), right.payload(y)
        r = rand_vrel(rng, left.n, right.n)
        lax = exact_lax(r, a, b, left, right, mods)
        kant = kantorovich(r, a, b, left, right, mods, rng=rng, samples=3)
        assert kant == lax


def test_sampled_preserved_pairs_never_exceed():
    rng = random.Random(157)
    for _ in range(60):
        family = rng.choice(("markov_chain", "fuzzy_ts", "metric_ts"))
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        a, b = left.payload(x), right.payload(y)
        r = rand_vrel(rng, left.n, right.n)
        lax = exact_lax(r, a, b, left, right, mods)
        f = {i: rand_value(rng) for i in range(left.n)}
        g = minimal_preserved_g(f, r)
        # (f, g) is r-preserved by construction
        for i in range(left.n):
            for j in range(right.n):
                assert Fraction(f[i]) - Fraction(g[j]) <= Fraction(r.at(i, j))
        for m in mods:
            gap = truncated_sub(
                sugeno_evaluate(m, f, a, left), sugeno_evaluate(m, g, b, right)
            )
            assert gap <= lax


def test_hausdorff_cross_check():
    # a single label at distance zero turns the metric diamond into the
    # plain one-sided Hausdorff lifting
    rng = random.Random(163)
    metric = LabelMetric.from_table(["l"], {})
    mods = (ModalityId("mdia", "l"),)
    for _ in range(60):
        nl, nr = rng.randint(1, 3), rng.randint(1, 3)
        left = make_system(
            "metric_ts",
            [f"s{i}" for i in range(nl)],
            [
                EdgeSet(frozenset(("l", t) for t in range(nl) if rng.random() < 0.6))
                for _ in range(nl)
            ],
            metric,
        )
        right = make_system(
            "metric_ts",
            [f"s{i}" for i in range(nr)],
            [
                EdgeSet(frozenset(("l", t) for t in range(nr) if rng.random() < 0.6))
                for _ in range(nr)
            ],
            metric,
        )
        x, y = rng.randrange(nl), rng.randrange(nr)
        r = rand_vrel(rng, nl, nr)
        S = left.payload(x).support()
        T = right.payload(y).support()
        want = ZERO
        for i in S:
            inner = Value(1)
            for j in T:
                inner = meet(inner, r.at(i, j))
            want = join(want, inner)
        got = exact_lax(r, left.payload(x), right.payload(y), left, right, mods)
        assert got == want
