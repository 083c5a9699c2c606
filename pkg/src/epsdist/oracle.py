"""Brute-force ground truth at desk scale.

Everything here enumerates predicates over payload supports and is
exponential in the support size; a hard cap on the combined state count
guards every entry point.  These routines are the independent side of the
package's dual-route checks: the game, the polynomial solvers and the
extraction algorithms are all validated against them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .modalities import ModalityId, evaluate, sugeno_evaluate
from .systems import Payload, Rel2, System, VRel, payload_support
from .values import ZERO, Value, join, truncated_sub

DEFAULT_CAP = 12


class OracleCapExceededError(Exception):
    """The instance is too large for exhaustive enumeration."""


def ensure_within_cap(n_combined: int, cap: int = DEFAULT_CAP) -> None:
    if n_combined > cap:
        raise OracleCapExceededError(
            f"{n_combined} combined states exceed the oracle cap of {cap}"
        )


def subsets_by_size(elements: Iterable[int]) -> Iterable[frozenset[int]]:
    """All subsets, ordered by increasing size, then lexicographically."""
    elems = sorted(elements)
    for size in range(len(elems) + 1):
        for combo in combinations(elems, size):
            yield frozenset(combo)


def greatest_simulation(
    left: System,
    right: System,
    mods: Sequence[ModalityId],
    eps: Value,
    cap: int = DEFAULT_CAP,
) -> Rel2:
    """The greatest relation R with lambda(R[A])(right side) >=
    lambda(A)(left side) - eps for all predicates A and all modalities.

    Computed by deleting violating pairs from the full relation until
    stable.  Predicates are enumerated over payload supports only, which is
    exhaustive because a modality's value depends only on the predicate's
    intersection with the support, and shrinking A only shrinks R[A].
    """
    ensure_within_cap(left.n + right.n, cap)
    rows: list[set[int]] = [set(range(right.n)) for _ in range(left.n)]
    per_state: list[list[tuple[ModalityId, frozenset[int], Value]]] = []
    for x in range(left.n):
        a = left.payload(x)
        checks = []
        for A in subsets_by_size(payload_support(a)):
            for m in mods:
                checks.append((m, A, evaluate(m, A, a, left)))
        per_state.append(checks)

    changed = True
    while changed:
        changed = False
        for x in range(left.n):
            a_checks = per_state[x]
            for y in sorted(rows_with(rows, x)):
                b = right.payload(y)
                for m, A, va in a_checks:
                    image = frozenset().union(*(rows[ax] for ax in A)) if A else frozenset()
                    if evaluate(m, image, b, right) < Fraction(va) - eps:
                        rows[x].discard(y)
                        changed = True
                        break
    return Rel2((frozenset(r) for r in rows), right.n)


def rows_with(rows: list[set[int]], x: int) -> set[int]:
    return set(rows[x])


def exact_lax(
    r: VRel,
    a: Payload,
    b: Payload,
    left: System,
    right: System,
    mods: Sequence[ModalityId],
    cap: int = DEFAULT_CAP,
) -> Value:
    """The least eps such that every predicate A satisfies
    lambda(r_eps[A])(b) >= lambda(A)(a) - eps, where r_eps is the
    non-strict eps-cut of r.

    Between consecutive distinct values of r the cut is constant, so the
    feasible set restricted to such an interval is an upward-closed
    sub-interval whose least element is max(interval start, worst modality
    deficit); the overall infimum is the least of these over the intervals
    where it fits, and is always attained.
    """
    ensure_within_cap(left.n + right.n, cap)
    checks = []
    for A in subsets_by_size(payload_support(a)):
        for m in mods:
            checks.append((m, A, Fraction(evaluate(m, A, a, left))))

    lows = sorted({ZERO, *r.distinct_values()})
    best: Fraction | None = None
    for i, lo in enumerate(lows):
        cut = r.cut(lo)
        deficit = Fraction(0)
        for m, A, va in checks:
            vb = evaluate(m, cut.image(A), b, right)
            deficit = max(deficit, va - vb)
        candidate = max(Fraction(lo), deficit)
        hi = lows[i + 1] if i + 1 < len(lows) else None
        feasible = candidate <= 1 if hi is None else candidate < hi
        if feasible and (best is None or candidate < best):
            best = candidate
    assert best is not None  # the last interval is always feasible
    return Value(best)


def exact_distance(
    left: System,
    right: System,
    mods: Sequence[ModalityId],
    cap: int = DEFAULT_CAP,
    cross_check: bool = False,
) -> VRel:
    """Least fixpoint of r(x, y) -> exact_lax(r, payload(x), payload(y)).

    Iteration starts from the all-zero relation and ascends; every iterate
    entry is of the form max(previous iterate value, modality deficit), so
    all values live in the finite set of truncated modality differences and
    the chain stabilizes.  With cross_check the result is replayed against
    the game: similarity must hold at d(x, y) and fail just below it.
    """
    ensure_within_cap(left.n + right.n, cap)
    r = VRel.constant(left.n, right.n, ZERO)
    for _ in range(100000):
        entries = [
            [
                exact_lax(r, left.payload(x), right.payload(y), left, right, mods, cap)
                for y in range(right.n)
            ]
            for x in range(left.n)
        ]
        nxt = VRel(entries, right.n)
        for x in range(left.n):
            for y in range(right.n):
                if nxt.at(x, y) < r.at(x, y):
                    raise RuntimeError("distance iteration not ascending (internal bug)")
        if nxt == r:
            break
        r = nxt
    else:
        raise RuntimeError("distance iteration failed to stabilize (internal bug)")

    if cross_check:
        _cross_check_against_game(r, left, right, mods, cap)
    return r


def _cross_check_against_game(
    r: VRel, left: System, right: System, mods: Sequence[ModalityId], cap: int
) -> None:
    from .game import GameConfig, check_similar

    values = sorted({ZERO, *r.distinct_values()})
    for x in range(left.n):
        for y in range(right.n):
            d = r.at(x, y)
            if not check_similar(GameConfig(left, right, tuple(mods), d, cap), x, y):
                raise RuntimeError(f"game disagrees at d({x},{y}) = {d}")
            if d > 0:
                below = [v for v in values if v < d]
                probe = Value((Fraction(below[-1] if below else 0) + Fraction(d)) / 2)
                if check_similar(GameConfig(left, right, tuple(mods), probe, cap), x, y):
                    raise RuntimeError(f"game similar below d({x},{y}) = {d}")


def minimal_preserved_g(f: dict[int, Value], r: VRel) -> dict[int, Value]:
    """The pointwise-least g such that f(x) - g(y) <= r(x, y) everywhere."""
    out: dict[int, Value] = {}
    for y in range(r.n_right):
        g = ZERO
        for x, fx in f.items():
            g = join(g, truncated_sub(fx, r.at(x, y)))
        out[y] = g
    return out


def kantorovich(
    r: VRel,
    a: Payload,
    b: Payload,
    left: System,
    right: System,
    mods: Sequence[ModalityId],
    cap: int = DEFAULT_CAP,
    rng=None,
    samples: int = 0,
) -> Value:
    """Largest Sugeno-value gap over relation-preserved predicate pairs.

    For each modality and each support predicate A, the pair (f, g) with
    f = lambda(A)(a) on A (0 elsewhere) and g the least predicate preserved
    against r realizes the supremum on finite carriers; optionally a random
    sample of further preserved pairs is mixed in as a lower-bound sanity
    set.
    """
    ensure_within_cap(left.n + right.n, cap)
    best = ZERO
    supp = payload_support(a)
    for m in mods:
        for A in subsets_by_size(supp):
            eps_a = evaluate(m, A, a, left)
            f = {x: eps_a for x in A}
            g = minimal_preserved_g(f, r)
            gap = truncated_sub(
                sugeno_evaluate(m, f, a, left), sugeno_evaluate(m, g, b, right)
            )
            best = join(best, gap)
    if rng is not None and samples:
        grid = [Value(Fraction(k, 8)) for k in range(9)]
        for _ in range(samples):
            f = {x: rng.choice(grid) for x in range(left.n)}
            g = minimal_preserved_g(f, r)
            for m in mods:
                gap = truncated_sub(
                    sugeno_evaluate(m, f, a, left), sugeno_evaluate(m, g, b, right)
                )
                best = join(best, gap)
    return best
