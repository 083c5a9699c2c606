"""The one-step-deviation game between two systems at a fixed threshold.

Positions are state pairs (x, y), owned by Spoiler, who must exhibit a
predicate pair (A, B) whose modality values deviate by more than eps;
Duplicator answers with a pair from A x (Y\\B), and loses when stuck.
Spoiler's winning region is the least fixpoint of "can force the next
position into the set", computed by synchronous rounds; the witness found
when a position first enters the set is a history-free winning strategy.

A pair of states is similar at eps exactly when it is outside Spoiler's
winning region, and on finite systems that is equivalent to their distance
being at most eps, which is what the bisection and exact distance modes
compute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .modalities import ModalityId
from .oracle import DEFAULT_CAP
from .solvers import (
    NoPolynomialSolverError,
    Witness,
    WitnessQuery,
    brute_force_solve,
    solve,
)
from .systems import Rel2, System
from .values import ZERO, Value


@dataclass(frozen=True)
class GameConfig:
    left: System
    right: System
    modalities: tuple[ModalityId, ...]
    eps: Value
    oracle_cap: int = DEFAULT_CAP


@dataclass
class GameSolution:
    """Spoiler's winning region with a history-free strategy.

    `strategy` and `stage` are defined exactly on the winning positions;
    every recorded witness only offers Duplicator replies that were already
    won in fewer rounds.
    """

    spoiler_wins: Rel2
    strategy: dict[tuple[int, int], Witness] = field(repr=False)
    stage: dict[tuple[int, int], int] = field(repr=False)
    rounds: int = 0


def _find_move(cfg: GameConfig, x: int, y: int, spoiler_set: Rel2) -> Witness | None:
    q = WitnessQuery(
        cfg.left.payload(x),
        cfg.right.payload(y),
        cfg.left,
        cfg.right,
        spoiler_set,
        cfg.eps,
        cfg.modalities,
    )
    try:
        return solve(q)
    except NoPolynomialSolverError:
        return brute_force_solve(q, cfg.oracle_cap)


def solve_game(cfg: GameConfig) -> GameSolution:
    nl, nr = cfg.left.n, cfg.right.n
    strategy: dict[tuple[int, int], Witness] = {}
    stage: dict[tuple[int, int], int] = {}
    spoiler_set = Rel2.empty(nl, nr)
    rounds = 0
    while True:
        rounds += 1
        additions: list[tuple[int, int, Witness]] = []
        for x in range(nl):
            for y in range(nr):
                if (x, y) in stage:
                    continue
                w = _find_move(cfg, x, y, spoiler_set)
                if w is not None:
                    additions.append((x, y, w))
        if not additions:
            rounds -= 1  # the last sweep added nothing
            break
        for x, y, w in additions:
            strategy[(x, y)] = w
            stage[(x, y)] = rounds
        spoiler_set = Rel2.from_pairs(nl, nr, stage.keys())
        if rounds > nl * nr:
            raise RuntimeError("game iteration exceeded its bound (internal bug)")
    return GameSolution(spoiler_set, strategy, stage, rounds)


def check_similar(cfg: GameConfig, x: int, y: int) -> bool:
    """True iff Duplicator wins (x, y): the states are similar at cfg.eps."""
    return not solve_game(cfg).spoiler_wins.has(x, y)


def distance_bisect(
    left: System,
    right: System,
    x: int,
    y: int,
    mods: Sequence[ModalityId],
    tol: Fraction = Fraction(1, 2 ** 20),
    oracle_cap: int = DEFAULT_CAP,
) -> tuple[Value, Value]:
    """Bracket the distance to within tol by bisection on the game.

    Returns (lo, hi) with hi - lo <= tol, the pair dissimilar at lo and
    similar at hi; (0, 0) when the states are already similar at 0.
    """
    mods = tuple(mods)

    def similar(eps: Value) -> bool:
        return check_similar(GameConfig(left, right, mods, eps, oracle_cap), x, y)

    if similar(ZERO):
        return (ZERO, ZERO)
    lo, hi = Fraction(0), Fraction(1)  # dissimilar at 0; always similar at 1
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if similar(Value(mid)):
            hi = mid
        else:
            lo = mid
    return (Value(lo), Value(hi))


def distance_exact(
    left: System,
    right: System,
    x: int,
    y: int,
    mods: Sequence[ModalityId],
    cap: int = DEFAULT_CAP,
) -> Value:
    """Exact distance via the enumeration oracle, confirmed by the game.

    On finite systems the infimum over feasible thresholds is attained, so
    the pair must be similar at exactly the returned value.
    """
    from .oracle import exact_distance

    d = exact_distance(left, right, mods, cap).at(x, y)
    if not check_similar(GameConfig(left, right, tuple(mods), d, cap), x, y):
        raise RuntimeError(f"distance {d} not attained in the game (internal bug)")
    return d


def distance(
    left: System,
    right: System,
    x: int,
    y: int,
    mods: Sequence[ModalityId],
    mode: str = "exact",
    tol: Fraction = Fraction(1, 2 ** 20),
    cap: int = DEFAULT_CAP,
):
    """Distance from x to y: a Value in exact mode, an interval in bisect mode."""
    if mode == "exact":
        return distance_exact(left, right, x, y, mods, cap)
    if mode == "bisect":
        return distance_bisect(left, right, x, y, mods, tol, cap)
    raise ValueError(f"unknown distance mode {mode!r}")
