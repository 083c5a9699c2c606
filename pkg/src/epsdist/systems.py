"""Finite quantitative transition systems and relations between their states.

A system is a finite state set together with one transition payload per
state; the payload variant (subdistribution, fuzzy set, labelled edge set,
...) is uniform across the system and determines which modalities apply.
Two compared systems never need to share a state space: every relation
carries both dimensions explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .values import Value, format_value, parse_value

MARKOV_CHAIN = "markov_chain"
LABELLED_MARKOV_CHAIN = "labelled_markov_chain"
GPTS = "gpts"
FUZZY_TS = "fuzzy_ts"
METRIC_TS = "metric_ts"
CONVEX_MC = "convex_mc"

SYSTEM_TYPES = (
    MARKOV_CHAIN,
    LABELLED_MARKOV_CHAIN,
    GPTS,
    FUZZY_TS,
    METRIC_TS,
    CONVEX_MC,
)


class SystemFormatError(ValueError):
    """A document violates the system schema; `path` points into it."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.reason = message


# ---------------------------------------------------------------------------
# Functor payloads
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubDist:
    """Finitely supported subdistribution over state indices (mass <= 1)."""

    weights: dict[int, Value]

    def raw_mass(self):
        # plain Fraction: may exceed 1 on not-yet-validated data
        return sum(self.weights.values(), start=Value(0))

    def mass(self) -> Value:
        return Value(self.raw_mass())

    def mass_of(self, states: Iterable[int]) -> Value:
        w = self.weights
        return Value(sum((w[x] for x in states if x in w), start=Value(0)))

    def support(self) -> frozenset[int]:
        return frozenset(self.weights)


@dataclass(frozen=True)
class LabelledSubDist:
    """One subdistribution per label (each slice mass <= 1)."""

    slices: dict[str, SubDist]

    def slice(self, label: str) -> SubDist:
        return self.slices.get(label, SubDist({}))

    def labels(self) -> frozenset[str]:
        return frozenset(a for a, d in self.slices.items() if d.weights)

    def support(self) -> frozenset[int]:
        out: set[int] = set()
        for d in self.slices.values():
            out |= d.support()
        return frozenset(out)


@dataclass(frozen=True)
class LabelDist:
    """Distribution over (label, state) pairs with total mass exactly 1."""

    weights: dict[tuple[str, int], Value]

    def raw_mass(self):
        return sum(self.weights.values(), start=Value(0))

    def mass(self) -> Value:
        return Value(self.raw_mass())

    def slice(self, label: str) -> SubDist:
        return SubDist(
            {x: w for (a, x), w in self.weights.items() if a == label}
        )

    def labels(self) -> frozenset[str]:
        return frozenset(a for (a, _x) in self.weights)

    def support(self) -> frozenset[int]:
        return frozenset(x for (_a, x) in self.weights)


@dataclass(frozen=True)
class FuzzySet:
    """Fuzzy successor set: membership degree per state."""

    degrees: dict[int, Value]

    def support(self) -> frozenset[int]:
        return frozenset(self.degrees)


@dataclass(frozen=True)
class EdgeSet:
    """Finite set of labelled edges (label, target state)."""

    edges: frozenset[tuple[str, int]]

    def labels(self) -> frozenset[str]:
        return frozenset(a for (a, _x) in self.edges)

    def support(self) -> frozenset[int]:
        return frozenset(x for (_a, x) in self.edges)


@dataclass(frozen=True)
class ConvexSet:
    """Non-empty convex set of full distributions, stored by its vertices.

    Modality evaluation only ever maximizes functions over the set that
    attain their extrema at vertices, so the vertex list is a faithful
    representation for everything this package computes.
    """

    vertices: tuple[SubDist, ...]

    def support(self) -> frozenset[int]:
        out: set[int] = set()
        for d in self.vertices:
            out |= d.support()
        return frozenset(out)


Payload = SubDist | LabelledSubDist | LabelDist | FuzzySet | EdgeSet | ConvexSet

_PAYLOAD_CLASS = {
    MARKOV_CHAIN: SubDist,
    LABELLED_MARKOV_CHAIN: LabelledSubDist,
    GPTS: LabelDist,
    FUZZY_TS: FuzzySet,
    METRIC_TS: EdgeSet,
    CONVEX_MC: ConvexSet,
}


def payload_support(payload: Payload) -> frozenset[int]:
    return payload.support()


def payload_labels(payload: Payload) -> frozenset[str]:
    if isinstance(payload, (LabelledSubDist, LabelDist, EdgeSet)):
        return payload.labels()
    return frozenset()


# ---------------------------------------------------------------------------
# Label metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabelMetric:
    """A finite metric space of labels, given as an explicit distance table."""

    labels: tuple[str, ...]
    _dist: dict[frozenset[str], Value] = field(repr=False)

    def dist(self, a: str, b: str) -> Value:
        if a == b:
            return Value(0)
        return self._dist[frozenset((a, b))]

    @staticmethod
    def from_table(labels: Iterable[str], table: Mapping[tuple[str, str], Value]) -> "LabelMetric":
        labels = tuple(labels)
        dist: dict[frozenset[str], Value] = {}
        for (a, b), v in table.items():
            if a == b:
                if v != 0:
                    raise ValueError(f"d({a},{a}) must be 0")
                continue
            key = frozenset((a, b))
            if key in dist and dist[key] != v:
                raise ValueError(f"asymmetric distances for {a},{b}")
            dist[key] = v
        metric = LabelMetric(labels, dist)
        metric._check_complete()
        metric._check_triangle()
        return metric

    def _check_complete(self) -> None:
        for i, a in enumerate(self.labels):
            for b in self.labels[i + 1:]:
                if frozenset((a, b)) not in self._dist:
                    raise ValueError(f"missing distance for labels {a},{b}")

    def _check_triangle(self) -> None:
        for a in self.labels:
            for b in self.labels:
                for c in self.labels:
                    if self.dist(a, c) > self.dist(a, b) + self.dist(b, c):
                        raise ValueError(
                            f"triangle inequality violated on {a},{b},{c}"
                        )


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class System:
    """A finite coalgebra: named states plus one payload per state index."""

    type: str
    states: tuple[str, ...]
    payloads: tuple[Payload, ...]
    label_metric: LabelMetric | None = None

    @property
    def n(self) -> int:
        return len(self.states)

    def index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def payload(self, x: int) -> Payload:
        return self.payloads[x]

    def occurring_labels(self) -> tuple[str, ...]:
        out: set[str] = set()
        for p in self.payloads:
            out |= payload_labels(p)
        return tuple(sorted(out))

    def label_space(self) -> tuple[str, ...]:
        if self.label_metric is not None:
            return tuple(self.label_metric.labels)
        return self.occurring_labels()


def make_system(
    type: str,
    states: Iterable[str],
    payloads: Iterable[Payload],
    label_metric: LabelMetric | None = None,
) -> System:
    """Construct and validate a system from already-built payloads."""
    sys_ = System(type, tuple(states), tuple(payloads), label_metric)
    _validate_system(sys_)
    return sys_


def _validate_system(sys_: System) -> None:
    if sys_.type not in SYSTEM_TYPES:
        raise SystemFormatError("type", f"unknown system type {sys_.type!r}")
    if len(sys_.states) != len(sys_.payloads):
        raise SystemFormatError("transitions", "one payload per state required")
    if len(set(sys_.states)) != len(sys_.states):
        raise SystemFormatError("states", "duplicate state names")
    want = _PAYLOAD_CLASS[sys_.type]
    n = sys_.n
    for i, p in enumerate(sys_.payloads):
        where = f"transitions.{sys_.states[i]}"
        if not isinstance(p, want):
            raise SystemFormatError(where, f"payload variant must be {want.__name__}")
        for x in p.support():
            if not 0 <= x < n:
                raise SystemFormatError(where, f"dangling state index {x}")
        if isinstance(p, SubDist) and p.raw_mass() > 1:
            raise SystemFormatError(where, "total mass > 1")
        if isinstance(p, LabelledSubDist):
            for a, d in p.slices.items():
                if d.raw_mass() > 1:
                    raise SystemFormatError(f"{where}.{a}", "slice mass > 1")
        if isinstance(p, LabelDist) and p.raw_mass() != 1:
            raise SystemFormatError(
                where, f"total mass ≠ 1 (got {format_value(p.raw_mass())})"
            )
        if isinstance(p, ConvexSet):
            if not p.vertices:
                raise SystemFormatError(where, "convex set must be non-empty")
            for k, d in enumerate(p.vertices):
                if d.raw_mass() != 1:
                    raise SystemFormatError(f"{where}[{k}]", "vertex mass ≠ 1")
    if sys_.type == METRIC_TS:
        if sys_.label_metric is None:
            raise SystemFormatError("label_metric", "metric systems need a label metric")
        known = set(sys_.label_metric.labels)
        for i, p in enumerate(sys_.payloads):
            for a, _x in p.edges:  # type: ignore[union-attr]
                if a not in known:
                    raise SystemFormatError(
                        f"transitions.{sys_.states[i]}", f"label {a!r} not in label metric"
                    )


# ---------------------------------------------------------------------------
# Two-valued and V-valued relations
# ---------------------------------------------------------------------------


class Rel2:
    """A two-valued relation between the state sets of two systems."""

    __slots__ = ("rows", "n_left", "n_right")

    def __init__(self, rows: Iterable[frozenset[int]], n_right: int):
        self.rows: tuple[frozenset[int], ...] = tuple(rows)
        self.n_left = len(self.rows)
        self.n_right = n_right

    @staticmethod
    def from_pairs(n_left: int, n_right: int, pairs: Iterable[tuple[int, int]]) -> "Rel2":
        rows: list[set[int]] = [set() for _ in range(n_left)]
        for x, y in pairs:
            rows[x].add(y)
        return Rel2((frozenset(r) for r in rows), n_right)

    @staticmethod
    def empty(n_left: int, n_right: int) -> "Rel2":
        return Rel2((frozenset() for _ in range(n_left)), n_right)

    @staticmethod
    def full(n_left: int, n_right: int) -> "Rel2":
        all_right = frozenset(range(n_right))
        return Rel2((all_right for _ in range(n_left)), n_right)

    def has(self, x: int, y: int) -> bool:
        return y in self.rows[x]

    def image(self, states: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for x in states:
            out |= self.rows[x]
        return frozenset(out)

    def complement(self) -> "Rel2":
        all_right = frozenset(range(self.n_right))
        return Rel2((all_right - row for row in self.rows), self.n_right)

    def converse(self) -> "Rel2":
        cols: list[set[int]] = [set() for _ in range(self.n_right)]
        for x, row in enumerate(self.rows):
            for y in row:
                cols[y].add(x)
        return Rel2((frozenset(c) for c in cols), self.n_left)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for x, row in enumerate(self.rows):
            for y in sorted(row):
                yield (x, y)

    def count(self) -> int:
        return sum(len(row) for row in self.rows)

    def subset_of(self, other: "Rel2") -> bool:
        return all(a <= b for a, b in zip(self.rows, other.rows))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Rel2)
            and self.n_right == other.n_right
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.n_right))

    def __repr__(self) -> str:
        return f"Rel2({list(self.pairs())!r})"


def relational_image(rel: Rel2, states: Iterable[int]) -> frozenset[int]:
    """{y | x R y for some x in the given set}."""
    return rel.image(states)


class VRel:
    """A [0,1]-valued relation between two state sets."""

    __slots__ = ("entries", "n_left", "n_right")

    def __init__(self, entries: Iterable[Iterable[Value]], n_right: int | None = None):
        self.entries: tuple[tuple[Value, ...], ...] = tuple(tuple(row) for row in entries)
        self.n_left = len(self.entries)
        self.n_right = len(self.entries[0]) if self.entries else (n_right or 0)

    @staticmethod
    def constant(n_left: int, n_right: int, v: Value) -> "VRel":
        return VRel(((v,) * n_right for _ in range(n_left)), n_right)

    def at(self, x: int, y: int) -> Value:
        return self.entries[x][y]

    def cut(self, eps: Value) -> Rel2:
        """The non-strict threshold relation {(x, y) | r(x, y) <= eps}."""
        return Rel2(
            (
                frozenset(y for y, v in enumerate(row) if v <= eps)
                for row in self.entries
            ),
            self.n_right,
        )

    def distinct_values(self) -> tuple[Value, ...]:
        return tuple(sorted({v for row in self.entries for v in row}))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VRel) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"VRel({[[format_value(v) for v in row] for row in self.entries]})"


def cut_relation(r: VRel, eps: Value) -> Rel2:
    return r.cut(eps)


# ---------------------------------------------------------------------------
# (De)serialization
# ---------------------------------------------------------------------------


def _req(doc: Mapping, key: str, path: str):
    if key not in doc:
        raise SystemFormatError(path, f"missing key {key!r}")
    return doc[key]


def _parse_val(text, path: str) -> Value:
    if not isinstance(text, str):
        raise SystemFormatError(path, "values must be strings")
    try:
        return parse_value(text)
    except ValueError as exc:
        raise SystemFormatError(path, str(exc)) from None


def _state_index(name, states: Mapping[str, int], path: str) -> int:
    if name not in states:
        raise SystemFormatError(path, f"unknown state {name!r}")
    return states[name]


def load_system(doc: Mapping) -> System:
    """Validate a parsed JSON document and build the system it describes.

    Missing transition entries denote mass/degree zero.  All schema and
    invariant violations raise SystemFormatError with a path into the
    document.
    """
    if not isinstance(doc, Mapping):
        raise SystemFormatError("", "document must be a JSON object")
    type_ = _req(doc, "type", "")
    if type_ not in SYSTEM_TYPES:
        raise SystemFormatError("type", f"unknown system type {type_!r}")
    names = _req(doc, "states", "")
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise SystemFormatError("states", "must be a list of strings")
    index = {s: i for i, s in enumerate(names)}
    if len(index) != len(names):
        raise SystemFormatError("states", "duplicate state names")

    metric = None
    if doc.get("label_metric") is not None:
        metric = _load_metric(doc["label_metric"])

    transitions = _req(doc, "transitions", "")
    if not isinstance(transitions, Mapping):
        raise SystemFormatError("transitions", "must be an object")
    for s in transitions:
        if s not in index:
            raise SystemFormatError(f"transitions.{s}", "unknown state")

    payloads = []
    for s in names:
        raw = transitions.get(s)
        path = f"transitions.{s}"
        payloads.append(_load_payload(type_, raw, index, path))
    return make_system(type_, names, payloads, metric)


def _load_metric(doc) -> LabelMetric:
    labels = _req(doc, "labels", "label_metric")
    if not isinstance(labels, list) or not all(isinstance(a, str) for a in labels):
        raise SystemFormatError("label_metric.labels", "must be a list of strings")
    for a in labels:
        if "," in a:
            raise SystemFormatError("label_metric.labels", f"label {a!r} contains a comma")
    dist_doc = _req(doc, "dist", "label_metric")
    if not isinstance(dist_doc, Mapping):
        raise SystemFormatError("label_metric.dist", "must be an object")
    table: dict[tuple[str, str], Value] = {}
    for key, raw in dist_doc.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise SystemFormatError(f"label_metric.dist.{key}", 'keys must be "a,b"')
        a, b = parts
        if a not in labels or b not in labels:
            raise SystemFormatError(f"label_metric.dist.{key}", "unknown label")
        table[(a, b)] = _parse_val(raw, f"label_metric.dist.{key}")
    try:
        return LabelMetric.from_table(labels, table)
    except ValueError as exc:
        raise SystemFormatError("label_metric.dist", str(exc)) from None


def _load_subdist(raw, index, path) -> SubDist:
    if raw is None:
        return SubDist({})
    if not isinstance(raw, Mapping):
        raise SystemFormatError(path, "expected an object of state: value")
    weights = {}
    for t, v in raw.items():
        val = _parse_val(v, f"{path}.{t}")
        if val != 0:
            weights[_state_index(t, index, f"{path}.{t}")] = val
    return SubDist(weights)


def _load_payload(type_: str, raw, index: Mapping[str, int], path: str) -> Payload:
    if type_ == MARKOV_CHAIN:
        return _load_subdist(raw, index, path)
    if type_ == LABELLED_MARKOV_CHAIN:
        if raw is None:
            return LabelledSubDist({})
        if not isinstance(raw, Mapping):
            raise SystemFormatError(path, "expected label: {state: value}")
        slices = {
            a: _load_subdist(sub, index, f"{path}.{a}") for a, sub in raw.items()
        }
        # absent and all-zero slices are the same subdistribution
        return LabelledSubDist({a: d for a, d in slices.items() if d.weights})
    if type_ == GPTS:
        if raw is None or not isinstance(raw, Mapping):
            raise SystemFormatError(path, "expected label: {state: value}")
        weights: dict[tuple[str, int], Value] = {}
        for a, sub in raw.items():
            d = _load_subdist(sub, index, f"{path}.{a}")
            for x, v in d.weights.items():
                weights[(a, x)] = v
        return LabelDist(weights)
    if type_ == FUZZY_TS:
        d = _load_subdist(raw, index, path)
        return FuzzySet(d.weights)
    if type_ == METRIC_TS:
        if raw is None:
            return EdgeSet(frozenset())
        if not isinstance(raw, list):
            raise SystemFormatError(path, "expected a list of [label, state] pairs")
        edges = set()
        for k, e in enumerate(raw):
            if not (isinstance(e, list) and len(e) == 2 and isinstance(e[0], str)):
                raise SystemFormatError(f"{path}[{k}]", "expected [label, state]")
            edges.add((e[0], _state_index(e[1], index, f"{path}[{k}]")))
        return EdgeSet(frozenset(edges))
    if type_ == CONVEX_MC:
        if raw is None or not isinstance(raw, list):
            raise SystemFormatError(path, "expected a list of distributions")
        vertices = tuple(
            _load_subdist(v, index, f"{path}[{k}]") for k, v in enumerate(raw)
        )
        return ConvexSet(vertices)
    raise SystemFormatError("type", f"unknown system type {type_!r}")


def system_to_document(sys_: System) -> dict:
    """Inverse of load_system on valid systems."""
    transitions: dict[str, object] = {}
    for i, name in enumerate(sys_.states):
        p = sys_.payloads[i]
        transitions[name] = _payload_to_doc(sys_, p)
    doc: dict[str, object] = {
        "type": sys_.type,
        "states": list(sys_.states),
        "transitions": transitions,
    }
    if sys_.label_metric is not None:
        m = sys_.label_metric
        dist = {}
        for i, a in enumerate(m.labels):
            for b in m.labels[i + 1:]:
                dist[f"{a},{b}"] = format_value(m.dist(a, b))
        doc["label_metric"] = {"labels": list(m.labels), "dist": dist}
    return doc


def _subdist_to_doc(sys_: System, d: SubDist) -> dict:
    return {
        sys_.states[x]: format_value(v) for x, v in sorted(d.weights.items())
    }


def _payload_to_doc(sys_: System, p: Payload):
    if isinstance(p, SubDist):
        return _subdist_to_doc(sys_, p)
    if isinstance(p, FuzzySet):
        return _subdist_to_doc(sys_, SubDist(p.degrees))
    if isinstance(p, LabelledSubDist):
        return {
            a: _subdist_to_doc(sys_, d) for a, d in sorted(p.slices.items()) if d.weights
        }
    if isinstance(p, LabelDist):
        return {
            a: _subdist_to_doc(sys_, p.slice(a)) for a in sorted(p.labels())
        }
    if isinstance(p, EdgeSet):
        return [[a, sys_.states[x]] for a, x in sorted(p.edges)]
    if isinstance(p, ConvexSet):
        return [_subdist_to_doc(sys_, d) for d in p.vertices]
    raise TypeError(f"unknown payload {p!r}")
