import random
from fractions import Fraction

from epsdist.game import (
    GameConfig,
    check_similar,
    distance,
    distance_bisect,
    distance_exact,
    solve_game,
)
from epsdist.modalities import ModalityId
from epsdist.oracle import exact_distance, greatest_simulation
from epsdist.systems import load_system
from epsdist.values import Value

from conftest import ALL_FAMILIES, modality_set, rand_eps, rand_system_pair

V = lambda a, b=1: Value(Fraction(a, b))

LOOP_FULL = {"type": "markov_chain", "states": ["x"], "transitions": {"x": {"x": "1"}}}
LOOP_NINE = {"type": "markov_chain", "states": ["y"], "transitions": {"y": {"y": "0.9"}}}


def loops():
    return load_system(LOOP_FULL), load_system(LOOP_NINE)


def test_worked_example_game():
    left, right = loops()
    mods = (ModalityId("P"),)
    tight = solve_game(GameConfig(left, right, mods, V(1, 20)))
    assert list(tight.spoiler_wins.pairs()) == [(0, 0)]
    assert tight.stage[(0, 0)] == 1
    loose = solve_game(GameConfig(left, right, mods, V(1, 10)))
    assert loose.spoiler_wins.count() == 0
    assert check_similar(GameConfig(left, right, mods, V(1, 10)), 0, 0)
    assert not check_similar(GameConfig(left, right, mods, V(1, 20)), 0, 0)


def test_identity_pairs_never_won():
    rng = random.Random(97)
    for family in ALL_FAMILIES:
        for _ in range(10):
            left, _ = rand_system_pair(rng, family, 3)
            mods = modality_set(left, bisim=rng.random() < 0.5)
            sol = solve_game(GameConfig(left, left, mods, rand_eps(rng)))
            for x in range(left.n):
                assert not sol.spoiler_wins.has(x, x)
    # reflexivity at eps = 0 as well
    left, _ = rand_system_pair(rng, "markov_chain", 3)
    cfg = GameConfig(left, left, modality_set(left), V(0))
    for x in range(left.n):
        assert check_similar(cfg, x, x)


def test_anti_monotone_in_eps():
    rng = random.Random(101)
    for _ in range(60):
        family = rng.choice(ALL_FAMILIES)
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left)
        e1, e2 = sorted((rand_eps(rng), rand_eps(rng)))
        wins_small = solve_game(GameConfig(left, right, mods, e1)).spoiler_wins
        wins_large = solve_game(GameConfig(left, right, mods, e2)).spoiler_wins
        assert wins_large.subset_of(wins_small)


def test_agreement_with_simulation_oracle():
    rng = random.Random(103)
    for _ in range(60):
        family = rng.choice(ALL_FAMILIES)
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left, bisim=rng.random() < 0.5)
        eps = rand_eps(rng)
        wins = solve_game(GameConfig(left, right, mods, eps)).spoiler_wins
        sim = greatest_simulation(left, right, mods, eps)
        for x in range(left.n):
            for y in range(right.n):
                assert wins.has(x, y) == (not sim.has(x, y))


def test_strategy_soundness_and_stage_bound():
    rng = random.Random(107)
    for _ in range(40):
        family = rng.choice(ALL_FAMILIES)
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left)
        sol = solve_game(GameConfig(left, right, mods, rand_eps(rng)))
        assert sol.rounds <= left.n * right.n
        all_right = frozenset(range(right.n))
        for (x, y), w in sol.strategy.items():
            stage = sol.stage[(x, y)]
            assert 1 <= stage <= left.n * right.n
            # every Duplicator reply lands in a strictly earlier stage
            for xx in w.A:
                for yy in all_right - w.B:
                    assert sol.stage[(xx, yy)] < stage


def test_distance_worked_example():
    left, right = loops()
    mods = (ModalityId("P"),)
    assert distance_exact(left, right, 0, 0, mods) == V(1, 10)
    lo, hi = distance_bisect(left, right, 0, 0, mods, tol=Fraction(1, 1024))
    assert lo < V(1, 10) <= hi
    assert Fraction(hi) - Fraction(lo) <= Fraction(1, 1024)
    assert not check_similar(GameConfig(left, right, mods, lo), 0, 0)
    assert check_similar(GameConfig(left, right, mods, hi), 0, 0)
    assert distance(left, right, 0, 0, mods, mode="exact") == V(1, 10)


def test_distance_zero_cases():
    left, _ = loops()
    mods = (ModalityId("P"),)
    assert distance_exact(left, left, 0, 0, mods) == V(0)
    assert distance_bisect(left, left, 0, 0, mods) == (V(0), V(0))


def test_bisect_brackets_exact_distance():
    rng = random.Random(109)
    for _ in range(20):
        family = rng.choice(("markov_chain", "fuzzy_ts"))
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        d = exact_distance(left, right, mods).at(x, y)
        lo, hi = distance_bisect(left, right, x, y, mods, tol=Fraction(1, 256))
        assert lo <= d <= hi or (d == 0 and (lo, hi) == (V(0), V(0)))
        if d > 0:
            assert lo < d <= hi


def test_symmetry_under_dual_closure():
    rng = random.Random(113)
    for _ in range(25):
        family = rng.choice(("markov_chain", "fuzzy_ts", "gpts"))
        left, right = rand_system_pair(rng, family, 3)
        mods = modality_set(left, bisim=True)
        x, y = rng.randrange(left.n), rng.randrange(right.n)
        there = distance_exact(left, right, x, y, mods)
        back = distance_exact(right, left, y, x, mods)
        assert there == back
