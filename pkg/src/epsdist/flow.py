"""Exact max-flow / min-cut on the small bipartite networks used by the
probability-modality solver.

The network for a pair of subdistributions mu (left), nu (right) and a
relation R has a source feeding every left state with capacity mu(x), unit
capacity on every R-edge, and every right state draining into the sink with
capacity nu(y).  Max flow >= mu(X) - eps holds exactly when every predicate
A satisfies nu(R[A]) >= mu(A) - eps; otherwise the min cut yields a
violating pair of predicates.

Capacities are exact rationals; augmentation is by shortest augmenting path
(BFS), which terminates regardless of capacity denominators.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable, Mapping

from .values import Value

SOURCE = ("source",)
SINK = ("sink",)


def left_node(x: int) -> tuple:
    return ("L", x)


def right_node(y: int) -> tuple:
    return ("R", y)


class _Edge:
    __slots__ = ("dst", "cap", "flow", "rev")

    def __init__(self, dst, cap):
        self.dst = dst
        self.cap = cap
        self.flow = Fraction(0)
        self.rev: "_Edge" | None = None

    def residual(self) -> Fraction:
        return self.cap - self.flow


class FlowNetwork:
    """Source / left part / right part / sink, with the capacities above."""

    def __init__(self, left: Iterable[int], right: Iterable[int]):
        self.left = tuple(left)
        self.right = tuple(right)
        self.adj: dict[tuple, list[_Edge]] = {SOURCE: [], SINK: []}
        for x in self.left:
            self.adj[left_node(x)] = []
        for y in self.right:
            self.adj[right_node(y)] = []
        self.middle: set[tuple[int, int]] = set()

    def add_edge(self, u: tuple, v: tuple, cap: Fraction) -> None:
        if cap < 0:
            raise ValueError("negative capacity")
        e = _Edge(v, cap)
        back = _Edge(u, Fraction(0))
        e.rev, back.rev = back, e
        self.adj[u].append(e)
        self.adj[v].append(back)


def build_network(
    mu: Mapping[int, Value],
    nu: Mapping[int, Value],
    relation: Iterable[tuple[int, int]],
    left: Iterable[int],
    right: Iterable[int],
) -> FlowNetwork:
    """Construct the network for (mu, nu, R) over explicit node sets."""
    net = FlowNetwork(left, right)
    left_set, right_set = set(net.left), set(net.right)
    for x in net.left:
        w = mu.get(x)
        if w:
            net.add_edge(SOURCE, left_node(x), Fraction(w))
    for y in net.right:
        w = nu.get(y)
        if w:
            net.add_edge(right_node(y), SINK, Fraction(w))
    for x, y in relation:
        if x in left_set and y in right_set:
            net.add_edge(left_node(x), right_node(y), Fraction(1))
            net.middle.add((x, y))
    return net


def max_flow_min_cut(net: FlowNetwork) -> tuple[Value, tuple[frozenset, frozenset]]:
    """Exact max flow plus the residual-reachability minimum cut (U, V)."""
    total = Fraction(0)
    while True:
        path = _shortest_augmenting_path(net)
        if path is None:
            break
        bottleneck = min(e.residual() for e in path)
        for e in path:
            e.flow += bottleneck
            e.rev.flow -= bottleneck
        total += bottleneck
    reachable = _residual_reachable(net)
    all_nodes = set(net.adj)
    return Value(total), (frozenset(reachable), frozenset(all_nodes - reachable))


def _shortest_augmenting_path(net: FlowNetwork) -> list[_Edge] | None:
    parent: dict[tuple, _Edge] = {}
    queue = deque([SOURCE])
    seen = {SOURCE}
    while queue:
        u = queue.popleft()
        if u == SINK:
            break
        for e in net.adj[u]:
            if e.dst not in seen and e.residual() > 0:
                seen.add(e.dst)
                parent[e.dst] = e
                queue.append(e.dst)
    if SINK not in parent:
        return None
    path = []
    node = SINK
    while node != SOURCE:
        e = parent[node]
        path.append(e)
        node = e.rev.dst
    path.reverse()
    return path


def _residual_reachable(net: FlowNetwork) -> set[tuple]:
    seen = {SOURCE}
    queue = deque([SOURCE])
    while queue:
        u = queue.popleft()
        for e in net.adj[u]:
            if e.dst not in seen and e.residual() > 0:
                seen.add(e.dst)
                queue.append(e.dst)
    return seen


def extract_witness(
    net: FlowNetwork, cut: tuple[frozenset, frozenset]
) -> tuple[frozenset[int], frozenset[int]]:
    """Read the violating predicate pair (A, B) off a minimum cut.

    Caller contract: the max flow is below mu(X) - eps.  Then the returned
    sets satisfy nu(B) < mu(A) - eps, and no relation edge leaves A for a
    state outside B (the cut saturates only source and sink edges).
    """
    U, _V = cut
    A = frozenset(x for x in net.left if left_node(x) in U)
    B = frozenset(y for y in net.right if right_node(y) in U)
    return A, B
