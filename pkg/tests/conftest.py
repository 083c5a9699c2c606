"""Shared deterministic generators for randomized tests.

All generators are driven by an explicit random.Random so every test pins
its own seed; nothing here touches global random state.
"""

from __future__ import annotations

import random
from fractions import Fraction

from epsdist.modalities import close_under_duals, default_modalities
from epsdist.systems import (
    CONVEX_MC,
    FUZZY_TS,
    GPTS,
    LABELLED_MARKOV_CHAIN,
    MARKOV_CHAIN,
    METRIC_TS,
    ConvexSet,
    EdgeSet,
    FuzzySet,
    LabelDist,
    LabelledSubDist,
    LabelMetric,
    Rel2,
    SubDist,
    System,
    VRel,
    make_system,
)
from epsdist.values import Value

ALL_FAMILIES = (
    MARKOV_CHAIN,
    LABELLED_MARKOV_CHAIN,
    GPTS,
    FUZZY_TS,
    METRIC_TS,
    CONVEX_MC,
)

EPS_GRID = tuple(
    Value(f)
    for f in (
        Fraction(0),
        Fraction(1, 20),
        Fraction(1, 10),
        Fraction(1, 8),
        Fraction(1, 5),
        Fraction(1, 4),
        Fraction(2, 5),
        Fraction(1, 2),
        Fraction(3, 4),
    )
)


def rand_value(rng: random.Random, den: int = 8) -> Value:
    return Value(Fraction(rng.randint(0, den), den))


def rand_eps(rng: random.Random) -> Value:
    return rng.choice(EPS_GRID)


def _compose_mass(rng: random.Random, supp: list[int], total: int, den: int) -> dict[int, Value]:
    # split `total` den-ths of mass over the support, dropping zero parts
    cuts = sorted(rng.randint(0, total) for _ in range(len(supp) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    return {x: Value(Fraction(p, den)) for x, p in zip(supp, parts) if p}


def rand_subdist(
    rng: random.Random,
    n: int,
    max_supp: int = 3,
    den: int = 8,
    full: bool = False,
) -> SubDist:
    lo = 1 if full else 0
    size = rng.randint(lo, min(max_supp, n))
    if size == 0:
        return SubDist({})
    supp = rng.sample(range(n), size)
    total = den if full else rng.randint(1, den)
    weights = _compose_mass(rng, supp, total, den)
    if full and not weights:
        weights = {supp[0]: Value(1)}
    return SubDist(weights)


def _names(n: int) -> list[str]:
    return [f"s{i}" for i in range(n)]


def rand_markov_chain(rng: random.Random, n: int, max_supp: int = 3, den: int = 8) -> System:
    return make_system(
        MARKOV_CHAIN, _names(n), [rand_subdist(rng, n, max_supp, den) for _ in range(n)]
    )


def rand_labelled_mc(
    rng: random.Random, n: int, labels=("a", "b"), max_supp: int = 2, den: int = 8
) -> System:
    payloads = []
    for _ in range(n):
        slices = {}
        for a in labels:
            if rng.random() < 0.8:
                d = rand_subdist(rng, n, max_supp, den)
                if d.weights:
                    slices[a] = d
        payloads.append(LabelledSubDist(slices))
    return make_system(LABELLED_MARKOV_CHAIN, _names(n), payloads)


def rand_gpts(rng: random.Random, n: int, labels=("a", "b"), den: int = 8) -> System:
    payloads = []
    pair_space = [(a, x) for a in labels for x in range(n)]
    for _ in range(n):
        size = rng.randint(1, min(3, len(pair_space)))
        supp = rng.sample(range(len(pair_space)), size)
        flat = _compose_mass(rng, supp, den, den)
        if not flat:
            flat = {supp[0]: Value(1)}
        payloads.append(LabelDist({pair_space[i]: v for i, v in flat.items()}))
    return make_system(GPTS, _names(n), payloads)


def rand_fuzzy(rng: random.Random, n: int, max_supp: int = 3, den: int = 8) -> System:
    payloads = []
    for _ in range(n):
        size = rng.randint(0, min(max_supp, n))
        supp = rng.sample(range(n), size)
        degrees = {x: v for x in supp if (v := rand_value(rng, den)) != 0}
        payloads.append(FuzzySet(degrees))
    return make_system(FUZZY_TS, _names(n), payloads)


def line_metric(rng: random.Random, k: int = 3, den: int = 8) -> LabelMetric:
    # labels sit at rational points of [0,1]; distance is |difference|
    points = sorted({Fraction(rng.randint(0, den), den) for _ in range(k)})
    labels = [f"l{i}" for i in range(len(points))]
    table = {}
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            table[(labels[i], labels[j])] = Value(points[j] - points[i])
    return LabelMetric.from_table(labels, table)


def rand_metric_ts(
    rng: random.Random, n: int, metric: LabelMetric | None = None, max_edges: int = 3
) -> System:
    metric = metric if metric is not None else line_metric(rng)
    payloads = []
    for _ in range(n):
        count = rng.randint(0, max_edges)
        edges = {
            (rng.choice(metric.labels), rng.randrange(n)) for _ in range(count)
        }
        payloads.append(EdgeSet(frozenset(edges)))
    return make_system(METRIC_TS, _names(n), payloads, metric)


def rand_convex(rng: random.Random, n: int, max_vertices: int = 2, den: int = 8) -> System:
    payloads = []
    for _ in range(n):
        count = rng.randint(1, max_vertices)
        payloads.append(
            ConvexSet(tuple(rand_subdist(rng, n, 3, den, full=True) for _ in range(count)))
        )
    return make_system(CONVEX_MC, _names(n), payloads)


def rand_system(rng: random.Random, family: str, n: int, **kw) -> System:
    if family == MARKOV_CHAIN:
        return rand_markov_chain(rng, n, **kw)
    if family == LABELLED_MARKOV_CHAIN:
        return rand_labelled_mc(rng, n, **kw)
    if family == GPTS:
        return rand_gpts(rng, n, **kw)
    if family == FUZZY_TS:
        return rand_fuzzy(rng, n, **kw)
    if family == METRIC_TS:
        return rand_metric_ts(rng, n, **kw)
    if family == CONVEX_MC:
        return rand_convex(rng, n, **kw)
    raise ValueError(family)


def rand_system_pair(rng: random.Random, family: str, max_n: int = 4) -> tuple[System, System]:
    nl, nr = rng.randint(1, max_n), rng.randint(1, max_n)
    if family == METRIC_TS:
        metric = line_metric(rng)
        return rand_metric_ts(rng, nl, metric), rand_metric_ts(rng, nr, metric)
    return rand_system(rng, family, nl), rand_system(rng, family, nr)


def modality_set(sys_: System, bisim: bool = False):
    mods = default_modalities(sys_)
    return close_under_duals(mods) if bisim else mods


def rand_rel2(rng: random.Random, n_left: int, n_right: int, p: float = 0.5) -> Rel2:
    pairs = [
        (x, y)
        for x in range(n_left)
        for y in range(n_right)
        if rng.random() < p
    ]
    return Rel2.from_pairs(n_left, n_right, pairs)


def rand_vrel(rng: random.Random, n_left: int, n_right: int, den: int = 4) -> VRel:
    return VRel(
        [[rand_value(rng, den) for _ in range(n_right)] for _ in range(n_left)],
        n_right,
    )
