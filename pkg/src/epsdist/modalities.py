"""Monotone modalities: unit-interval-valued observations on functor payloads.

Each modality turns a set of states A into a value lambda(A)(a) in [0,1]
observable on a payload a.  Six families are supported, one per payload
variant, plus a dual flag: the dual of lambda maps A to 1 - lambda(X\\A)(a).
The same families also act on [0,1]-valued predicates through a Sugeno
integral, which is what the quantitative logic evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .systems import (
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
    Payload,
    SubDist,
    System,
    payload_support,
)
from .values import ONE, ZERO, Value, complement, join, meet

P = "P"
P_LABEL = "P_label"
DIA_LABEL = "dia_label"
FUZZY_DIA = "fdia"
METRIC_DIA = "mdia"
CONVEX_DIA = "cdia"

_LABELLED_FAMILIES = (P_LABEL, DIA_LABEL, METRIC_DIA)

_FAMILY_PAYLOAD = {
    P: SubDist,
    P_LABEL: LabelledSubDist,
    DIA_LABEL: LabelDist,
    FUZZY_DIA: FuzzySet,
    METRIC_DIA: EdgeSet,
    CONVEX_DIA: ConvexSet,
}

_FAMILY_NAME = {
    P: "P",
    P_LABEL: "P",
    DIA_LABEL: "dia",
    FUZZY_DIA: "fdia",
    METRIC_DIA: "mdia",
    CONVEX_DIA: "cdia",
}


class ModalityMismatchError(TypeError):
    """Modality applied to a payload of the wrong variant."""


@dataclass(frozen=True)
class ModalityId:
    family: str
    label: str | None = None
    dual: bool = False

    def __post_init__(self):
        if self.family not in _FAMILY_PAYLOAD:
            raise ValueError(f"unknown modality family {self.family!r}")
        if (self.label is not None) != (self.family in _LABELLED_FAMILIES):
            raise ValueError(f"family {self.family} takes a label iff labelled")

    def dual_of(self) -> "ModalityId":
        return ModalityId(self.family, self.label, not self.dual)

    def name(self) -> str:
        base = _FAMILY_NAME[self.family]
        if self.label is not None:
            base += f"[{self.label}]"
        return ("~" + base) if self.dual else base

    def __str__(self) -> str:
        return self.name()


def parse_modality(text: str) -> ModalityId:
    """Parse a modality name such as "P", "~P", "P[a]", "mdia[b]"."""
    s = text.strip()
    dual = s.startswith("~")
    if dual:
        s = s[1:]
    label = None
    if s.endswith("]"):
        open_ = s.find("[")
        if open_ < 0:
            raise ValueError(f"malformed modality {text!r}")
        label = s[open_ + 1:-1]
        s = s[:open_]
    if s == "P":
        family = P_LABEL if label is not None else P
    elif s == "dia":
        family = DIA_LABEL
    elif s == "fdia":
        family = FUZZY_DIA
    elif s == "mdia":
        family = METRIC_DIA
    elif s == "cdia":
        family = CONVEX_DIA
    else:
        raise ValueError(f"unknown modality {text!r}")
    try:
        return ModalityId(family, label, dual)
    except ValueError as exc:
        raise ValueError(f"malformed modality {text!r}: {exc}") from None


def default_modalities(sys_: System) -> tuple[ModalityId, ...]:
    """The canonical modality set for a system's branching type."""
    if sys_.type == MARKOV_CHAIN:
        return (ModalityId(P),)
    if sys_.type == LABELLED_MARKOV_CHAIN:
        return tuple(ModalityId(P_LABEL, a) for a in sys_.label_space())
    if sys_.type == GPTS:
        return tuple(ModalityId(DIA_LABEL, a) for a in sys_.label_space())
    if sys_.type == FUZZY_TS:
        return (ModalityId(FUZZY_DIA),)
    if sys_.type == METRIC_TS:
        return tuple(ModalityId(METRIC_DIA, a) for a in sys_.label_space())
    if sys_.type == CONVEX_MC:
        return (ModalityId(CONVEX_DIA),)
    raise ValueError(f"unknown system type {sys_.type!r}")


def close_under_duals(mods: Iterable[ModalityId]) -> tuple[ModalityId, ...]:
    """Append missing duals, preserving order; idempotent."""
    out: list[ModalityId] = []
    seen: set[ModalityId] = set()
    for m in mods:
        if m not in seen:
            out.append(m)
            seen.add(m)
    for m in list(out):
        d = m.dual_of()
        if d not in seen:
            out.append(d)
            seen.add(d)
    return tuple(out)


_FAMILY_SYSTEM = {
    P: MARKOV_CHAIN,
    P_LABEL: LABELLED_MARKOV_CHAIN,
    DIA_LABEL: GPTS,
    FUZZY_DIA: FUZZY_TS,
    METRIC_DIA: METRIC_TS,
    CONVEX_DIA: CONVEX_MC,
}


def validate_modalities_for(mods: Iterable[ModalityId], sys_: System) -> None:
    """Reject modalities whose family or label does not fit the system."""
    space = set(sys_.label_space())
    for m in mods:
        if _FAMILY_SYSTEM[m.family] != sys_.type:
            raise ValueError(f"modality {m} does not apply to a {sys_.type} system")
        if m.label is not None and m.label not in space:
            raise ValueError(f"modality {m}: label not in the system's label space")


def compatible(m: ModalityId, payload: Payload) -> bool:
    return isinstance(payload, _FAMILY_PAYLOAD[m.family])


def _check_compatible(m: ModalityId, payload: Payload) -> None:
    if not compatible(m, payload):
        raise ModalityMismatchError(
            f"modality {m} does not apply to {type(payload).__name__}"
        )


def evaluate(m: ModalityId, states: Iterable[int], payload: Payload, sys_: System) -> Value:
    """lambda(A)(a): the modality's value on predicate A at payload a."""
    _check_compatible(m, payload)
    A = states if isinstance(states, frozenset) else frozenset(states)
    if m.dual:
        every = frozenset(range(sys_.n))
        primal = ModalityId(m.family, m.label)
        return complement(evaluate(primal, every - A, payload, sys_))
    return _evaluate_primal(m, A, payload, sys_)


def _evaluate_primal(m: ModalityId, A: frozenset[int], payload: Payload, sys_: System) -> Value:
    if m.family == P:
        return payload.mass_of(A)
    if m.family == P_LABEL:
        return payload.slice(m.label).mass_of(A)
    if m.family == DIA_LABEL:
        return payload.slice(m.label).mass_of(A)
    if m.family == FUZZY_DIA:
        best = ZERO
        for x, g in payload.degrees.items():
            if x in A:
                best = join(best, g)
        return best
    if m.family == METRIC_DIA:
        metric = sys_.label_metric
        if metric is None:
            raise ModalityMismatchError("metric modality needs a label metric")
        best = ZERO
        for b, x in payload.edges:
            if x in A:
                best = join(best, complement(metric.dist(m.label, b)))
        return best
    if m.family == CONVEX_DIA:
        best = ZERO
        for vertex in payload.vertices:
            best = join(best, vertex.mass_of(A))
        return best
    raise AssertionError(m.family)


def monotonicity_check(
    m: ModalityId,
    smaller: Iterable[int],
    larger: Iterable[int],
    payload: Payload,
    sys_: System,
) -> bool:
    """True iff lambda(A)(a) <= lambda(B)(a) for the given A subset of B."""
    A, B = frozenset(smaller), frozenset(larger)
    if not A <= B:
        raise ValueError("first predicate must be contained in the second")
    return evaluate(m, A, payload, sys_) <= evaluate(m, B, payload, sys_)


def sugeno_evaluate(
    m: ModalityId, f: Mapping[int, Value], payload: Payload, sys_: System
) -> Value:
    """The Sugeno transform of the modality, applied to a [0,1]-predicate f.

    Computed as the maximum over candidate thresholds c of
    min(c, lambda({x | f(x) >= c})(a)).  On a finite carrier the candidate
    set {0, 1} plus the values of f realizes the supremum: the cut is
    constant between consecutive values of f, so each constancy interval is
    maximized at its right endpoint, and the endpoint of the last interval
    is 1 (needed when lambda(empty set)(a) > 0, as happens for duals).

    Values of f outside the payload's support cannot influence the result
    and f may omit them.
    """
    _check_compatible(m, payload)
    candidates = {ZERO, ONE}
    supp = payload_support(payload)
    for x in supp:
        candidates.add(f.get(x, ZERO))
    best = ZERO
    for c in sorted(candidates):
        if c <= best:
            continue
        cut = frozenset(x for x in supp if f.get(x, ZERO) >= c)
        best = join(best, meet(c, evaluate(m, cut, payload, sys_)))
    return best
