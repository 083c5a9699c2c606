"""Distinguishing-formula extraction from Spoiler strategies.

Certificates are built for every winning position in one pass, in stage
order, so each position's formula reuses the formulae of the positions its
witness move forces Duplicator into.  The two-valued certificate for
(x0, y0) is [m >= q] over a join (over A) of meets (over Y\\B) of child
certificates, where (m, A, B) is the stored witness and q the modality
value of A on the left; the quantitative certificate is the same shape
under a Sugeno modality, with each child shifted so that it evaluates to
exactly q at its own left state.

A certificate is never trusted: recheck() re-evaluates the formula on both
systems from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .game import GameConfig, GameSolution
from .logic import (
    QUANTITATIVE,
    TWO_VALUED,
    Formula,
    QuantEvaluator,
    conj2,
    disj2,
    eval2,
    formula_from_dag,
    formula_to_dag,
    metrics,
    mod2,
    print_formula,
    qconj,
    qdisj,
    qmod,
    qshift_down,
    qshift_up,
)
from .modalities import evaluate
from .systems import System
from .values import Value, format_value, parse_value


@dataclass
class Certificate:
    """A formula separating a state pair by more than eps.

    Two-valued: the left state satisfies the formula at slack 0 while the
    right state fails it at slack eps.  Quantitative: the truth values gap
    by strictly more than eps.  `left_result`/`right_result` record the
    evaluations made at extraction time; recheck() recomputes them.
    """

    left_state: int
    right_state: int
    eps: Value
    logic: str
    formula: Formula
    left_result: bool | Value
    right_result: bool | Value


class NotDistinguishedError(KeyError):
    """Requested a certificate for a position outside the winning region."""


def extract_two_valued(
    solution: GameSolution, cfg: GameConfig
) -> dict[tuple[int, int], Certificate]:
    """Certificates in the threshold logic for every winning position."""
    left, right = cfg.left, cfg.right
    formulas: dict[tuple[int, int], object] = {}
    order = sorted(solution.stage, key=lambda p: (solution.stage[p], p))
    all_right = frozenset(range(right.n))
    for x0, y0 in order:
        w = solution.strategy[(x0, y0)]
        q = evaluate(w.modality, w.A, left.payload(x0), left)
        inner = disj2(
            conj2(formulas[(x, y)] for y in sorted(all_right - w.B))
            for x in sorted(w.A)
        )
        formulas[(x0, y0)] = mod2(w.modality, q, inner)

    left_cache: dict = {}
    right_cache: dict = {}
    certs: dict[tuple[int, int], Certificate] = {}
    for pos, formula in formulas.items():
        sat_left = pos[0] in eval2(formula, left, Value(0), left_cache)
        sat_right = pos[1] in eval2(formula, right, cfg.eps, right_cache)
        if not sat_left or sat_right:
            raise AssertionError(f"extracted formula fails at {pos} (internal bug)")
        certs[pos] = Certificate(
            pos[0], pos[1], cfg.eps, TWO_VALUED, formula, sat_left, sat_right
        )
    return certs


def extract_quantitative(
    solution: GameSolution, cfg: GameConfig
) -> dict[tuple[int, int], Certificate]:
    """Certificates in the quantitative logic for every winning position."""
    left, right = cfg.left, cfg.right
    left_eval = QuantEvaluator(left)
    right_eval = QuantEvaluator(right)
    formulas: dict[tuple[int, int], object] = {}
    value_at_left: dict[tuple[int, int], Value] = {}
    order = sorted(solution.stage, key=lambda p: (solution.stage[p], p))
    all_right = frozenset(range(right.n))
    certs: dict[tuple[int, int], Certificate] = {}
    for x0, y0 in order:
        w = solution.strategy[(x0, y0)]
        q = evaluate(w.modality, w.A, left.payload(x0), left)
        disjuncts = []
        for x in sorted(w.A):
            conjuncts = []
            for y in sorted(all_right - w.B):
                child = formulas[(x, y)]
                v = value_at_left[(x, y)]
                # normalize the reused child to value exactly q at its own
                # left state; q and v both lie in [0,1], so one shift never
                # truncates there
                if v < q:
                    child = qshift_up(child, Value(Fraction(q) - Fraction(v)))
                elif v > q:
                    child = qshift_down(child, Value(Fraction(v) - Fraction(q)))
                conjuncts.append(child)
            disjuncts.append(qconj(conjuncts))
        node = qmod(w.modality, qdisj(disjuncts))
        formulas[(x0, y0)] = node
        lv = left_eval.value(node, x0)
        rv = right_eval.value(node, y0)
        if not Fraction(rv) < Fraction(lv) - cfg.eps:
            raise AssertionError(
                f"extracted formula gap fails at {(x0, y0)} (internal bug)"
            )
        value_at_left[(x0, y0)] = lv
        certs[(x0, y0)] = Certificate(x0, y0, cfg.eps, QUANTITATIVE, node, lv, rv)
    return certs


def recheck(cert: Certificate, left: System, right: System) -> bool:
    """Re-evaluate the certificate's formula on both systems and confirm
    its separating invariant, trusting nothing recorded at extraction."""
    try:
        if cert.logic == TWO_VALUED:
            sat_left = cert.left_state in eval2(cert.formula, left, Value(0))
            sat_right = cert.right_state in eval2(cert.formula, right, cert.eps)
            return sat_left and not sat_right
        if cert.logic == QUANTITATIVE:
            lv = QuantEvaluator(left).value(cert.formula, cert.left_state)
            rv = QuantEvaluator(right).value(cert.formula, cert.right_state)
            return Fraction(rv) < Fraction(lv) - cert.eps
    except (TypeError, IndexError, KeyError):
        return False
    raise ValueError(f"unknown certificate logic {cert.logic!r}")


_TEXT_LIMIT = 5000  # include readable text only for small trees


def certificate_to_document(cert: Certificate, left: System, right: System) -> dict:
    doc: dict = {
        "left_state": left.states[cert.left_state],
        "right_state": right.states[cert.right_state],
        "epsilon": format_value(cert.eps),
        "logic": cert.logic,
        "formula_dag": formula_to_dag(cert.formula),
    }
    if cert.logic == TWO_VALUED:
        doc["evaluation"] = {
            "left_sat_at_0": bool(cert.left_result),
            "right_sat_at_eps": bool(cert.right_result),
        }
    else:
        doc["evaluation"] = {
            "left_value": format_value(cert.left_result),
            "right_value": format_value(cert.right_result),
        }
    if metrics(cert.formula)[1] <= _TEXT_LIMIT:
        doc["formula_text"] = print_formula(cert.formula)
    return doc


def certificate_from_document(doc: Mapping, left: System, right: System) -> Certificate:
    logic = doc.get("logic")
    if logic not in (TWO_VALUED, QUANTITATIVE):
        raise ValueError(f"unknown certificate logic {logic!r}")
    formula = formula_from_dag(doc["formula_dag"], logic)
    eps = parse_value(doc["epsilon"])
    ev = doc.get("evaluation", {})
    if logic == TWO_VALUED:
        left_result: bool | Value = bool(ev.get("left_sat_at_0", False))
        right_result: bool | Value = bool(ev.get("right_sat_at_eps", True))
    else:
        left_result = parse_value(ev["left_value"])
        right_result = parse_value(ev["right_value"])
    return Certificate(
        left.index(doc["left_state"]),
        right.index(doc["right_state"]),
        eps,
        logic,
        formula,
        left_result,
        right_result,
    )
