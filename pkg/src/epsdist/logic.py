"""Formula dags for the two companion modal logics, with evaluators.

Two-valued formulae are built from tt, ff, binary meets/joins and
threshold modalities [M>=q]; they are judged at a slack level eps, where a
modal formula holds when the modality value of the child's satisfaction
set reaches q minus eps.  Quantitative formulae replace thresholds by
truncated constant shifts (+)/(-) and evaluate modalities by Sugeno
integration, yielding a [0,1] truth value per state.

Structurally identical subterms are shared: constructors intern nodes in
module-level tables, so node identity is structural equality, evaluators
may memoize on nodes, and re-parsing a printed formula yields the same
object graph.  Construction is effectively serialized (single atomic
table insert per node); evaluation is read-only.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .modalities import ModalityId, evaluate, parse_modality, sugeno_evaluate
from .systems import System, payload_support
from .values import ONE, ZERO, Value, join, meet, truncated_add, truncated_sub

TWO_VALUED = "two-valued"
QUANTITATIVE = "quantitative"


class Formula2:
    __slots__ = ()


class F2Top(Formula2):
    __slots__ = ()


class F2Bot(Formula2):
    __slots__ = ()


class F2And(Formula2):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula2, right: Formula2):
        self.left = left
        self.right = right


class F2Or(Formula2):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula2, right: Formula2):
        self.left = left
        self.right = right


class F2Mod(Formula2):
    __slots__ = ("modality", "threshold", "child")

    def __init__(self, modality: ModalityId, threshold: Value, child: Formula2):
        self.modality = modality
        self.threshold = threshold
        self.child = child


class FormulaQ:
    __slots__ = ()


class FQTop(FormulaQ):
    __slots__ = ()


class FQBot(FormulaQ):
    __slots__ = ()


class FQAnd(FormulaQ):
    __slots__ = ("left", "right")

    def __init__(self, left: FormulaQ, right: FormulaQ):
        self.left = left
        self.right = right


class FQOr(FormulaQ):
    __slots__ = ("left", "right")

    def __init__(self, left: FormulaQ, right: FormulaQ):
        self.left = left
        self.right = right


class FQShiftUp(FormulaQ):
    __slots__ = ("child", "amount")

    def __init__(self, child: FormulaQ, amount: Value):
        self.child = child
        self.amount = amount


class FQShiftDown(FormulaQ):
    __slots__ = ("child", "amount")

    def __init__(self, child: FormulaQ, amount: Value):
        self.child = child
        self.amount = amount


class FQMod(FormulaQ):
    __slots__ = ("modality", "child")

    def __init__(self, modality: ModalityId, child: FormulaQ):
        self.modality = modality
        self.child = child


Formula = Formula2 | FormulaQ

# Hash-cons tables; interned nodes are immortal, so keying on child object
# identity is stable.  dict.setdefault keeps insertion race-free.
_TABLE: dict = {}


def _cons(key, build):
    node = _TABLE.get(key)
    if node is None:
        node = _TABLE.setdefault(key, build())
    return node


def top2() -> Formula2:
    return _cons(("2t",), F2Top)


def bot2() -> Formula2:
    return _cons(("2f",), F2Bot)


def and2(left: Formula2, right: Formula2) -> Formula2:
    return _cons(("2&", left, right), lambda: F2And(left, right))


def or2(left: Formula2, right: Formula2) -> Formula2:
    return _cons(("2|", left, right), lambda: F2Or(left, right))


def mod2(m: ModalityId, threshold: Value, child: Formula2) -> Formula2:
    return _cons(("2m", m, threshold, child), lambda: F2Mod(m, threshold, child))


def qtop() -> FormulaQ:
    return _cons(("qt",), FQTop)


def qbot() -> FormulaQ:
    return _cons(("qf",), FQBot)


def qand(left: FormulaQ, right: FormulaQ) -> FormulaQ:
    return _cons(("q&", left, right), lambda: FQAnd(left, right))


def qor(left: FormulaQ, right: FormulaQ) -> FormulaQ:
    return _cons(("q|", left, right), lambda: FQOr(left, right))


def qshift_up(child: FormulaQ, amount: Value) -> FormulaQ:
    return _cons(("q+", child, amount), lambda: FQShiftUp(child, amount))


def qshift_down(child: FormulaQ, amount: Value) -> FormulaQ:
    return _cons(("q-", child, amount), lambda: FQShiftDown(child, amount))


def qmod(m: ModalityId, child: FormulaQ) -> FormulaQ:
    return _cons(("qm", m, child), lambda: FQMod(m, child))


def conj2(children: Iterable[Formula2]) -> Formula2:
    """Left-folded conjunction; the empty conjunction is tt."""
    out = None
    for c in children:
        out = c if out is None else and2(out, c)
    return top2() if out is None else out


def disj2(children: Iterable[Formula2]) -> Formula2:
    """Left-folded disjunction; the empty disjunction is ff."""
    out = None
    for c in children:
        out = c if out is None else or2(out, c)
    return bot2() if out is None else out


def qconj(children: Iterable[FormulaQ]) -> FormulaQ:
    out = None
    for c in children:
        out = c if out is None else qand(out, c)
    return qtop() if out is None else out


def qdisj(children: Iterable[FormulaQ]) -> FormulaQ:
    out = None
    for c in children:
        out = c if out is None else qor(out, c)
    return qbot() if out is None else out


def children_of(node: Formula) -> tuple:
    if isinstance(node, (F2And, F2Or, FQAnd, FQOr)):
        return (node.left, node.right)
    if isinstance(node, F2Mod):
        return (node.child,)
    if isinstance(node, (FQShiftUp, FQShiftDown, FQMod)):
        return (node.child,)
    return ()


def postorder(root: Formula, skip: Callable[[Formula], bool] | None = None) -> list:
    """Children-before-parents order over the dag, each node once."""
    out: list = []
    seen: set = set()
    stack: list[tuple[Formula, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if node in seen or (skip is not None and skip(node)):
            continue
        seen.add(node)
        stack.append((node, True))
        for c in children_of(node):
            stack.append((c, False))
    return out


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval2(
    formula: Formula2,
    sys_: System,
    eps: Value,
    cache: dict | None = None,
) -> frozenset[int]:
    """Satisfaction set of a two-valued formula at slack level eps.

    Each dag node is evaluated once; pass the same `cache` to amortize
    evaluation of many formulae sharing subterms (the cache is only valid
    for one system and one eps).
    """
    sets: dict = cache if cache is not None else {}
    everything = frozenset(range(sys_.n))
    for node in postorder(formula, skip=lambda n: n in sets):
        if isinstance(node, F2Top):
            sets[node] = everything
        elif isinstance(node, F2Bot):
            sets[node] = frozenset()
        elif isinstance(node, F2And):
            sets[node] = sets[node.left] & sets[node.right]
        elif isinstance(node, F2Or):
            sets[node] = sets[node.left] | sets[node.right]
        elif isinstance(node, F2Mod):
            bar = truncated_sub(node.threshold, eps)
            child = sets[node.child]
            sets[node] = frozenset(
                x
                for x in range(sys_.n)
                if evaluate(node.modality, child, sys_.payload(x), sys_) >= bar
            )
        else:
            raise TypeError(f"not a two-valued formula node: {node!r}")
    return sets[formula]


class QuantEvaluator:
    """Memoized per-state evaluator for quantitative formulae on one system.

    Requests are lazy: evaluating a modal node at state x only pulls child
    values at the successor support of x, so certificate extraction pays
    for the (node, state) pairs it actually touches.
    """

    def __init__(self, sys_: System):
        self.sys = sys_
        self.memo: dict[tuple, Value] = {}

    def value(self, formula: FormulaQ, x: int) -> Value:
        memo = self.memo
        stack: list[tuple[FormulaQ, int]] = [(formula, x)]
        while stack:
            node, s = stack[-1]
            if (node, s) in memo:
                stack.pop()
                continue
            if isinstance(node, FQTop):
                memo[(node, s)] = ONE
            elif isinstance(node, FQBot):
                memo[(node, s)] = ZERO
            elif isinstance(node, (FQAnd, FQOr)):
                l, r = (node.left, s), (node.right, s)
                missing = [d for d in (l, r) if d not in memo]
                if missing:
                    stack.extend(missing)
                    continue
                op = meet if isinstance(node, FQAnd) else join
                memo[(node, s)] = op(memo[l], memo[r])
            elif isinstance(node, (FQShiftUp, FQShiftDown)):
                c = (node.child, s)
                if c not in memo:
                    stack.append(c)
                    continue
                op = truncated_add if isinstance(node, FQShiftUp) else truncated_sub
                memo[(node, s)] = op(memo[c], node.amount)
            elif isinstance(node, FQMod):
                payload = self.sys.payload(s)
                supp = payload_support(payload)
                missing = [(node.child, t) for t in supp if (node.child, t) not in memo]
                if missing:
                    stack.extend(missing)
                    continue
                f = {t: memo[(node.child, t)] for t in supp}
                memo[(node, s)] = sugeno_evaluate(node.modality, f, payload, self.sys)
            else:
                raise TypeError(f"not a quantitative formula node: {node!r}")
            stack.pop()
        return memo[(formula, x)]


def evalQ(formula: FormulaQ, sys_: System) -> tuple[Value, ...]:
    """The truth map of a quantitative formula, indexed by state."""
    ev = QuantEvaluator(sys_)
    return tuple(ev.value(formula, x) for x in range(sys_.n))


# ---------------------------------------------------------------------------
# Rewrites
# ---------------------------------------------------------------------------


def relax(formula: Formula2, delta: Value) -> Formula2:
    """Lower every modal threshold by delta (truncated at 0).

    Satisfaction shifts accordingly: holding at slack eps is the same as
    the relaxed formula holding at slack eps - delta, for delta <= eps.
    """
    out: dict = {}
    for node in postorder(formula):
        if isinstance(node, F2Top) or isinstance(node, F2Bot):
            out[node] = node
        elif isinstance(node, F2And):
            out[node] = and2(out[node.left], out[node.right])
        elif isinstance(node, F2Or):
            out[node] = or2(out[node.left], out[node.right])
        else:
            out[node] = mod2(
                node.modality, truncated_sub(node.threshold, delta), out[node.child]
            )
    return out[formula]


def negateQ(
    formula: FormulaQ, available: Iterable[ModalityId] | None = None
) -> FormulaQ:
    """The pointwise complement: the result evaluates to 1 - the original.

    Negation is pushed inward: meets and joins swap, shifts reverse, and
    each modality is replaced by its dual over the negated child.  When
    `available` is given, modalities whose dual is not in it are rejected.
    """
    allowed = None if available is None else set(available)
    out: dict = {}
    for node in postorder(formula):
        if isinstance(node, FQTop):
            out[node] = qbot()
        elif isinstance(node, FQBot):
            out[node] = qtop()
        elif isinstance(node, FQAnd):
            out[node] = qor(out[node.left], out[node.right])
        elif isinstance(node, FQOr):
            out[node] = qand(out[node.left], out[node.right])
        elif isinstance(node, FQShiftUp):
            out[node] = qshift_down(out[node.child], node.amount)
        elif isinstance(node, FQShiftDown):
            out[node] = qshift_up(out[node.child], node.amount)
        else:
            dual = node.modality.dual_of()
            if allowed is not None and dual not in allowed:
                raise ValueError(f"dual modality {dual} not available")
            out[node] = qmod(dual, out[node.child])
    return out[formula]


def formula_modalities(formula: Formula) -> tuple[ModalityId, ...]:
    """The distinct modalities occurring in a formula, in dag order."""
    out = []
    for node in postorder(formula):
        if isinstance(node, (F2Mod, FQMod)) and node.modality not in out:
            out.append(node.modality)
    return tuple(out)


def metrics(formula: Formula) -> tuple[int, int, int]:
    """(dag size, tree size, modal rank).

    Dag size counts each shared node once (a modality contributes one
    node); tree size counts duplicated subterms repeatedly and may be
    exponentially larger; modal rank is the deepest modality nesting.
    """
    order = postorder(formula)
    tree: dict = {}
    rank: dict = {}
    for node in order:
        kids = children_of(node)
        tree[node] = 1 + sum(tree[c] for c in kids)
        r = max((rank[c] for c in kids), default=0)
        if isinstance(node, (F2Mod, FQMod)):
            r += 1
        rank[node] = r
    return len(order), tree[formula], rank[formula]


# ---------------------------------------------------------------------------
# Text syntax
# ---------------------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<shift>\(\+\)|\(-\))
  | (?P<geq>>=)
  | (?P<num>\d+(?:/\d+|\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<punct>[()\[\]<>&|~])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> tuple[str, str, int]:
        kind, text, pos = self.next()
        if text != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        return kind, text, pos

    def value(self) -> Value:
        kind, text, pos = self.next()
        if kind != "num":
            raise FormulaSyntaxError(f"expected a value literal, found {text!r}", pos)
        try:
            return Value(Fraction(text))
        except ZeroDivisionError:
            raise FormulaSyntaxError("zero denominator", pos) from None
        except ValueError:
            raise FormulaSyntaxError("threshold outside [0, 1]", pos) from None

    def modality(self) -> ModalityId:
        dual = False
        if self.peek()[1] == "~":
            self.next()
            dual = True
        kind, fam, pos = self.next()
        if kind != "ident":
            raise FormulaSyntaxError(f"expected a modality name, found {fam!r}", pos)
        label = None
        if self.peek()[1] == "[":
            self.next()
            lkind, label, lpos = self.next()
            if lkind not in ("ident", "num"):
                raise FormulaSyntaxError(f"expected a label, found {label!r}", lpos)
            self.expect("]")
        text = ("~" if dual else "") + fam + (f"[{label}]" if label is not None else "")
        try:
            return parse_modality(text)
        except ValueError as exc:
            raise FormulaSyntaxError(str(exc), pos) from None

    # two-valued -----------------------------------------------------------

    def form2(self) -> Formula2:
        kind, text, pos = self.peek()
        if text == "tt":
            self.next()
            return top2()
        if text == "ff":
            self.next()
            return bot2()
        if text == "(":
            self.next()
            left = self.form2()
            op, optext, oppos = self.next()
            if optext == ")":
                return left  # grouping parentheses
            if optext not in ("&", "|"):
                raise FormulaSyntaxError(f"expected '&', '|' or ')', found {optext!r}", oppos)
            right = self.form2()
            self.expect(")")
            return and2(left, right) if optext == "&" else or2(left, right)
        if text == "[":
            self.next()
            m = self.modality()
            self.expect(">=")
            q = self.value()
            self.expect("]")
            child = self.form2()
            return mod2(m, q, child)
        raise FormulaSyntaxError(f"unexpected token {text or 'end of input'!r}", pos)

    # quantitative ----------------------------------------------------------

    def formq(self) -> FormulaQ:
        node = self.atomq()
        while self.peek()[0] == "shift":
            _kind, op, _pos = self.next()
            amount = self.value()
            node = qshift_up(node, amount) if op == "(+)" else qshift_down(node, amount)
        return node

    def atomq(self) -> FormulaQ:
        kind, text, pos = self.peek()
        if text == "tt":
            self.next()
            return qtop()
        if text == "ff":
            self.next()
            return qbot()
        if text == "(":
            self.next()
            left = self.formq()
            op, optext, oppos = self.next()
            if optext == ")":
                return left
            if optext not in ("&", "|"):
                raise FormulaSyntaxError(f"expected '&', '|' or ')', found {optext!r}", oppos)
            right = self.formq()
            self.expect(")")
            return qand(left, right) if optext == "&" else qor(left, right)
        if text == "<":
            self.next()
            m = self.modality()
            self.expect(">")
            child = self.atomq()
            return qmod(m, child)
        raise FormulaSyntaxError(f"unexpected token {text or 'end of input'!r}", pos)

    def finish(self, node):
        kind, text, pos = self.peek()
        if kind != "eof":
            raise FormulaSyntaxError(f"trailing input {text!r}", pos)
        return node


def parse_formula2(text: str) -> Formula2:
    p = _Parser(text)
    return p.finish(p.form2())


def parse_formulaq(text: str) -> FormulaQ:
    p = _Parser(text)
    return p.finish(p.formq())


def parse_formula(text: str, logic: str) -> Formula:
    if logic == TWO_VALUED:
        return parse_formula2(text)
    if logic == QUANTITATIVE:
        return parse_formulaq(text)
    raise ValueError(f"unknown logic {logic!r}")


def print_formula(node: Formula) -> str:
    """Canonical text; parsing it back yields the identical dag.

    Shared subterms are printed repeatedly, so the output length follows
    tree size; prefer the dag serialization for large certificates.
    """
    if isinstance(node, (F2Top, FQTop)):
        return "tt"
    if isinstance(node, (F2Bot, FQBot)):
        return "ff"
    if isinstance(node, (F2And, FQAnd)):
        return f"({print_formula(node.left)} & {print_formula(node.right)})"
    if isinstance(node, (F2Or, FQOr)):
        return f"({print_formula(node.left)} | {print_formula(node.right)})"
    if isinstance(node, F2Mod):
        return f"[{node.modality}>={node.threshold}] {print_formula(node.child)}"
    if isinstance(node, FQShiftUp):
        return f"{print_formula(node.child)} (+) {node.amount}"
    if isinstance(node, FQShiftDown):
        return f"{print_formula(node.child)} (-) {node.amount}"
    if isinstance(node, FQMod):
        child = print_formula(node.child)
        if isinstance(node.child, (FQShiftUp, FQShiftDown)):
            child = f"({child})"
        return f"<{node.modality}> {child}"
    raise TypeError(f"not a formula node: {node!r}")


# ---------------------------------------------------------------------------
# Dag serialization (certificate files)
# ---------------------------------------------------------------------------


def formula_to_dag(formula: Formula) -> list[dict]:
    """Topologically sorted node list with child indices; the root is last."""
    order = postorder(formula)
    index = {node: i for i, node in enumerate(order)}
    out = []
    for node in order:
        if isinstance(node, (F2Top, FQTop)):
            out.append({"op": "top"})
        elif isinstance(node, (F2Bot, FQBot)):
            out.append({"op": "bot"})
        elif isinstance(node, (F2And, FQAnd)):
            out.append({"op": "and", "args": [index[node.left], index[node.right]]})
        elif isinstance(node, (F2Or, FQOr)):
            out.append({"op": "or", "args": [index[node.left], index[node.right]]})
        elif isinstance(node, F2Mod):
            out.append(
                {
                    "op": "mod",
                    "modality": str(node.modality),
                    "threshold": str(node.threshold),
                    "arg": index[node.child],
                }
            )
        elif isinstance(node, FQShiftUp):
            out.append({"op": "shift_up", "amount": str(node.amount), "arg": index[node.child]})
        elif isinstance(node, FQShiftDown):
            out.append({"op": "shift_down", "amount": str(node.amount), "arg": index[node.child]})
        elif isinstance(node, FQMod):
            out.append({"op": "smod", "modality": str(node.modality), "arg": index[node.child]})
        else:
            raise TypeError(f"not a formula node: {node!r}")
    return out


def formula_from_dag(nodes: list[Mapping], logic: str) -> Formula:
    """Rebuild a formula from its serialized dag."""
    from .values import parse_value

    if logic not in (TWO_VALUED, QUANTITATIVE):
        raise ValueError(f"unknown logic {logic!r}")
    two = logic == TWO_VALUED
    built: list = []

    def ref(i):
        if not isinstance(i, int) or not 0 <= i < len(built):
            raise ValueError(f"bad child reference in node {len(built)}")
        return built[i]

    for doc in nodes:
        op = doc.get("op")
        if op == "top":
            built.append(top2() if two else qtop())
        elif op == "bot":
            built.append(bot2() if two else qbot())
        elif op in ("and", "or"):
            args = doc.get("args")
            if not isinstance(args, list) or len(args) != 2:
                raise ValueError(f"bad args in node {len(built)}")
            l, r = ref(args[0]), ref(args[1])
            if two:
                built.append(and2(l, r) if op == "and" else or2(l, r))
            else:
                built.append(qand(l, r) if op == "and" else qor(l, r))
        elif op == "mod":
            if not two:
                raise ValueError("threshold modality in a quantitative dag")
            m = parse_modality(doc["modality"])
            built.append(mod2(m, parse_value(doc["threshold"]), ref(doc.get("arg"))))
        elif op in ("shift_up", "shift_down"):
            if two:
                raise ValueError("shift in a two-valued dag")
            amt = parse_value(doc["amount"])
            c = ref(doc.get("arg"))
            built.append(qshift_up(c, amt) if op == "shift_up" else qshift_down(c, amt))
        elif op == "smod":
            if two:
                raise ValueError("Sugeno modality in a two-valued dag")
            built.append(qmod(parse_modality(doc["modality"]), ref(doc.get("arg"))))
        else:
            raise ValueError(f"unknown node op {op!r}")
    if not built:
        raise ValueError("empty formula dag")
    return built[-1]
