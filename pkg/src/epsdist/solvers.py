"""Per-family solvers for the one-step witness problem.

A witness for a query (a, b, S, eps, modalities) is a modality together
with predicates A, B such that lambda(B)(b) < lambda(A)(a) - eps and every
pair in A x (Y\\B) lies in S.  Witnesses are Spoiler moves in the game:
S is the set of positions Spoiler has already won, and taking B as the
image of A under the complement relation R = (X x Y)\\S always satisfies
the side condition while never weakening existence (any valid B contains
R[A], and the modalities are monotone).

Probability families reduce to max-flow; supremum-shaped families reduce
to singleton predicates; duals reduce to the primal problem with the two
sides swapped and the relation transposed.  The convex family has no
polynomial solver and callers fall back to brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .flow import build_network, extract_witness, max_flow_min_cut
from .modalities import (
    CONVEX_DIA,
    DIA_LABEL,
    FUZZY_DIA,
    METRIC_DIA,
    P,
    P_LABEL,
    ModalityId,
    ModalityMismatchError,
    compatible,
    evaluate,
)
from .oracle import DEFAULT_CAP, ensure_within_cap, subsets_by_size
from .systems import Payload, Rel2, System, payload_support
from .values import Value


class NoPolynomialSolverError(Exception):
    """The modality family has no polynomial witness solver; use brute force."""


class WitnessInvariantError(AssertionError):
    """A constructed witness failed its defining inequalities (internal bug)."""


@dataclass(frozen=True)
class WitnessQuery:
    left_payload: Payload
    right_payload: Payload
    left_system: System
    right_system: System
    spoiler_set: Rel2
    eps: Value
    modalities: tuple[ModalityId, ...]


@dataclass(frozen=True)
class Witness:
    modality: ModalityId
    A: frozenset[int]
    B: frozenset[int]


def checked_witness(q: WitnessQuery, m: ModalityId, A: frozenset[int], B: frozenset[int]) -> Witness:
    """Build a witness, re-validating both defining conditions."""
    va = evaluate(m, A, q.left_payload, q.left_system)
    vb = evaluate(m, B, q.right_payload, q.right_system)
    if not Fraction(vb) < Fraction(va) - q.eps:
        raise WitnessInvariantError(f"{m}: {vb} not < {va} - {q.eps}")
    all_right = frozenset(range(q.right_system.n))
    for x in A:
        if not (all_right - B) <= q.spoiler_set.rows[x]:
            raise WitnessInvariantError(f"{m}: A x (Y\\B) leaves the spoiler set at {x}")
    return Witness(m, A, B)


def solve(q: WitnessQuery) -> Witness | None:
    """Find a witness with the per-family polynomial solvers, or report none.

    Modalities are tried in the given order; the first hit wins, so results
    are deterministic.
    """
    R = q.spoiler_set.complement()
    for m in q.modalities:
        _require_compatible(m, q.left_payload)
        w = _solve_one(q, m, R)
        if w is not None:
            return w
    return None


def _require_compatible(m: ModalityId, payload: Payload) -> None:
    if not compatible(m, payload):
        raise ModalityMismatchError(
            f"modality {m} does not apply to {type(payload).__name__}"
        )


def _solve_one(q: WitnessQuery, m: ModalityId, R: Rel2) -> Witness | None:
    if m.family == CONVEX_DIA:
        raise NoPolynomialSolverError(f"no polynomial solver for {m}")
    if m.dual:
        return _solve_dual(q, m)
    if m.family in (P, P_LABEL, DIA_LABEL):
        return _solve_prob(q, m, R)
    if m.family in (FUZZY_DIA, METRIC_DIA):
        return _solve_sup(q, m, R)
    raise AssertionError(m.family)


def _prob_slice(m: ModalityId, payload: Payload) -> Mapping[int, Value]:
    if m.family == P:
        return payload.weights
    return payload.slice(m.label).weights


def _solve_prob(q: WitnessQuery, m: ModalityId, R: Rel2) -> Witness | None:
    """Probability families: max-flow on the network over the two supports.

    A witness exists iff the max flow stays below mu's total mass minus
    eps; the residual min cut then provides A, and B is completed to the
    full image R[A] (the network only sees the support of nu, but states
    outside it carry no mass, so the inequality is unaffected).
    """
    mu = _prob_slice(m, q.left_payload)
    if not mu:
        return None  # the left side evaluates to 0 on every predicate
    nu = _prob_slice(m, q.right_payload)
    left_states = sorted(mu)
    right_states = sorted(nu)
    pairs = [(x, y) for x in left_states for y in right_states if R.has(x, y)]
    net = build_network(mu, nu, pairs, left_states, right_states)
    flow, cut = max_flow_min_cut(net)
    total = sum(mu.values(), start=Fraction(0))
    if not Fraction(flow) < total - q.eps:
        return None
    A, _b_net = extract_witness(net, cut)
    return checked_witness(q, m, A, R.image(A))


def _solve_sup(q: WitnessQuery, m: ModalityId, R: Rel2) -> Witness | None:
    """Supremum-shaped families: the modality value of any predicate is the
    join over its singletons, so it suffices to scan singletons."""
    a, b = q.left_payload, q.right_payload
    for x in sorted(payload_support(a)):
        A = frozenset((x,))
        va = evaluate(m, A, a, q.left_system)
        B = R.image(A)
        vb = evaluate(m, B, b, q.right_system)
        if Fraction(vb) < Fraction(va) - q.eps:
            return checked_witness(q, m, A, B)
    return None


def _solve_dual(q: WitnessQuery, m: ModalityId) -> Witness | None:
    """Duals mirror to the primal problem on the swapped payloads and the
    transposed spoiler set; a mirrored witness (A', B') un-mirrors to
    (X\\B', Y\\A')."""
    primal = ModalityId(m.family, m.label)
    mirrored = WitnessQuery(
        q.right_payload,
        q.left_payload,
        q.right_system,
        q.left_system,
        q.spoiler_set.converse(),
        q.eps,
        (primal,),
    )
    w = _solve_one(mirrored, primal, mirrored.spoiler_set.complement())
    if w is None:
        return None
    A = frozenset(range(q.left_system.n)) - w.B
    B = frozenset(range(q.right_system.n)) - w.A
    return checked_witness(q, m, A, B)


def brute_force_solve(q: WitnessQuery, cap: int = DEFAULT_CAP) -> Witness | None:
    """Testing oracle for solve(): enumerate predicates over the left
    support in increasing size (then lexicographic) order, always taking B
    as the image of A under the complement of the spoiler set."""
    ensure_within_cap(q.left_system.n + q.right_system.n, cap)
    for m in q.modalities:
        _require_compatible(m, q.left_payload)
    R = q.spoiler_set.complement()
    for A in subsets_by_size(payload_support(q.left_payload)):
        B = R.image(A)
        for m in q.modalities:
            va = evaluate(m, A, q.left_payload, q.left_system)
            vb = evaluate(m, B, q.right_payload, q.right_system)
            if Fraction(vb) < Fraction(va) - q.eps:
                return checked_witness(q, m, A, B)
    return None
