"""Batch command-line front end.

Subcommands: check, distance, distinguish, eval, validate, oracle.
Structured JSON goes to stdout (one object per invocation, deterministic
key order); --human switches to prose.  Exit codes: 0 success/similar,
1 not-similar or invalid certificate, 2 pair not distinguishable,
64 file or parse errors, 65 contract violations, 66 oracle cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .extract import (
    certificate_from_document,
    certificate_to_document,
    extract_quantitative,
    extract_two_valued,
    recheck,
)
from .game import GameConfig, distance_bisect, distance_exact, solve_game
from .logic import (
    QUANTITATIVE,
    TWO_VALUED,
    FormulaSyntaxError,
    eval2,
    evalQ,
    formula_modalities,
    parse_formula2,
    parse_formulaq,
)
from .modalities import (
    ModalityId,
    ModalityMismatchError,
    close_under_duals,
    default_modalities,
    parse_modality,
    validate_modalities_for,
)
from .oracle import (
    DEFAULT_CAP,
    OracleCapExceededError,
    exact_distance,
    greatest_simulation,
)
from .systems import System, SystemFormatError, load_system
from .values import Value, format_value, parse_value

EX_DATA = 64
EX_CONTRACT = 65
EX_CAP = 66


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise CliError(EX_CONTRACT, message)


def _emit(args, doc: dict, human: str) -> None:
    if args.human:
        print(human)
    else:
        print(json.dumps(doc, sort_keys=True))


def _load_system(path: str) -> System:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(EX_DATA, f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EX_DATA, f"{path}: invalid JSON: {exc}") from None
    try:
        return load_system(doc)
    except SystemFormatError as exc:
        raise CliError(EX_DATA, f"{path}: {exc}") from None


def _state(sys_: System, name: str, what: str) -> int:
    try:
        return sys_.index(name)
    except KeyError:
        raise CliError(EX_CONTRACT, f"{what}: unknown state {name!r}") from None


def _eps(text: str) -> Value:
    try:
        return parse_value(text)
    except ValueError as exc:
        raise CliError(EX_CONTRACT, f"--eps: {exc}") from None


def _modalities(args, left: System, right: System | None) -> tuple[ModalityId, ...]:
    if args.modalities:
        try:
            mods = tuple(parse_modality(p) for p in args.modalities.split(","))
        except ValueError as exc:
            raise CliError(EX_CONTRACT, f"--modalities: {exc}") from None
    else:
        mods = default_modalities(left)
    if args.bisim:
        mods = close_under_duals(mods)
    for sys_, side in ((left, "left"), (right, "right")):
        if sys_ is None:
            continue
        try:
            validate_modalities_for(mods, sys_)
        except ValueError as exc:
            raise CliError(EX_CONTRACT, f"{side} system: {exc}") from None
    return mods


def _pair_args(p: _Parser, eps: bool = True) -> None:
    p.add_argument("--left", required=True, help="left system JSON file")
    p.add_argument("--right", required=True, help="right system JSON file")
    p.add_argument("--lx", required=True, help="state in the left system")
    p.add_argument("--ry", required=True, help="state in the right system")
    p.add_argument("--modalities", help="comma-separated modalities, e.g. P,~P")
    p.add_argument("--bisim", action="store_true", help="close modalities under duals")
    if eps:
        p.add_argument("--eps", required=True, help="threshold (rational in [0,1])")


def build_parser() -> _Parser:
    parser = _Parser(prog="epsdist", description=__doc__)
    parser.add_argument("--human", action="store_true", help="prose output")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_):
        p = sub.add_parser(name, help=help_)
        # SUPPRESS keeps a --human given before the subcommand alive
        p.add_argument(
            "--human", action="store_true", default=argparse.SUPPRESS, help="prose output"
        )
        return p

    p = command("check", "decide similarity at a threshold")
    _pair_args(p)

    p = command("distance", "behavioural distance between two states")
    _pair_args(p, eps=False)
    p.add_argument("--mode", default="exact", help="exact or bisect:TOL")

    p = command("distinguish", "emit a distinguishing-formula certificate")
    _pair_args(p)
    p.add_argument("--logic", choices=[TWO_VALUED, QUANTITATIVE], required=True)
    p.add_argument("--out", required=True, help="certificate output file")

    p = command("eval", "evaluate a formula on a system")
    p.add_argument("--formula-file", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--eps", help="slack level: two-valued when given, else quantitative")

    p = command("validate", "independently recheck a certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = command("oracle", "exponential-time ground-truth computations")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    for name, help_ in (
        ("distance", "exact distance matrix (within cap)"),
        ("simulation", "greatest threshold simulation (within cap)"),
    ):
        op = osub.add_parser(name, help=help_)
        op.add_argument(
            "--human", action="store_true", default=argparse.SUPPRESS, help="prose output"
        )
        op.add_argument("--left", required=True)
        op.add_argument("--right", required=True)
        if name == "simulation":
            op.add_argument("--eps", required=True)
        op.add_argument("--modalities")
        op.add_argument("--bisim", action="store_true")
        op.add_argument("--cap", type=int, default=DEFAULT_CAP)
    return parser


def _require_same_type(left: System, right: System) -> None:
    if left.type != right.type:
        raise CliError(
            EX_CONTRACT, f"system types differ: {left.type} vs {right.type}"
        )


def _cmd_check(args) -> int:
    left, right = _load_system(args.left), _load_system(args.right)
    _require_same_type(left, right)
    mods = _modalities(args, left, right)
    eps = _eps(args.eps)
    x, y = _state(left, args.lx, "--lx"), _state(right, args.ry, "--ry")
    cfg = GameConfig(left, right, mods, eps)
    similar = not solve_game(cfg).spoiler_wins.has(x, y)
    verdict = "similar" if similar else "not-similar"
    _emit(
        args,
        {
            "eps": format_value(eps),
            "left_state": args.lx,
            "right_state": args.ry,
            "result": verdict,
        },
        verdict,
    )
    return 0 if similar else 1


def _parse_mode(text: str):
    if text == "exact":
        return ("exact", None)
    if text.startswith("bisect:"):
        try:
            tol = parse_value(text.split(":", 1)[1])
        except ValueError as exc:
            raise CliError(EX_CONTRACT, f"--mode: {exc}") from None
        if tol == 0:
            raise CliError(EX_CONTRACT, "--mode: bisection tolerance must be positive")
        return ("bisect", tol)
    if text == "bisect":
        return ("bisect", Value(Fraction(1, 2 ** 20)))
    raise CliError(EX_CONTRACT, f"--mode: expected exact or bisect:TOL, got {text!r}")


def _cmd_distance(args) -> int:
    left, right = _load_system(args.left), _load_system(args.right)
    _require_same_type(left, right)
    mods = _modalities(args, left, right)
    x, y = _state(left, args.lx, "--lx"), _state(right, args.ry, "--ry")
    mode, tol = _parse_mode(args.mode)
    if mode == "exact":
        d = distance_exact(left, right, x, y, mods)
        _emit(
            args,
            {"mode": "exact", "distance": format_value(d)},
            format_value(d),
        )
    else:
        lo, hi = distance_bisect(left, right, x, y, mods, Fraction(tol))
        _emit(
            args,
            {
                "mode": "bisect",
                "lo": format_value(lo),
                "hi": format_value(hi),
                "tolerance": format_value(tol),
            },
            f"distance in [{format_value(lo)}, {format_value(hi)}]",
        )
    return 0


def _cmd_distinguish(args) -> int:
    left, right = _load_system(args.left), _load_system(args.right)
    _require_same_type(left, right)
    mods = _modalities(args, left, right)
    eps = _eps(args.eps)
    x, y = _state(left, args.lx, "--lx"), _state(right, args.ry, "--ry")
    cfg = GameConfig(left, right, mods, eps)
    solution = solve_game(cfg)
    if not solution.spoiler_wins.has(x, y):
        _emit(
            args,
            {
                "result": "not-distinguishable",
                "eps": format_value(eps),
                "left_state": args.lx,
                "right_state": args.ry,
            },
            f"not distinguishable at {format_value(eps)}",
        )
        return 2
    extractor = extract_two_valued if args.logic == TWO_VALUED else extract_quantitative
    cert = extractor(solution, cfg)[(x, y)]
    doc = certificate_to_document(cert, left, right)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    summary = {
        "result": "distinguished",
        "eps": format_value(eps),
        "left_state": args.lx,
        "right_state": args.ry,
        "logic": args.logic,
        "out": args.out,
        "evaluation": doc["evaluation"],
    }
    if "formula_text" in doc:
        summary["formula"] = doc["formula_text"]
    _emit(
        args,
        summary,
        f"wrote {args.out}: {doc.get('formula_text', '(large formula)')}",
    )
    return 0


def _cmd_eval(args) -> int:
    sys_ = _load_system(args.system)
    try:
        with open(args.formula_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EX_DATA, f"cannot read {args.formula_file}: {exc}") from None
    try:
        if args.eps is not None:
            formula = parse_formula2(text)
        else:
            formula = parse_formulaq(text)
    except FormulaSyntaxError as exc:
        raise CliError(EX_DATA, f"{args.formula_file}: {exc}") from None
    try:
        validate_modalities_for(formula_modalities(formula), sys_)
    except ValueError as exc:
        raise CliError(EX_CONTRACT, str(exc)) from None
    if args.eps is not None:
        eps = _eps(args.eps)
        sat = eval2(formula, sys_, eps)
        names = [sys_.states[i] for i in sorted(sat)]
        _emit(
            args,
            {"logic": TWO_VALUED, "eps": format_value(eps), "satisfying": names},
            " ".join(names) if names else "(none)",
        )
    else:
        values = evalQ(formula, sys_)
        table = {sys_.states[i]: format_value(v) for i, v in enumerate(values)}
        _emit(
            args,
            {"logic": QUANTITATIVE, "values": table},
            "\n".join(f"{s}: {table[s]}" for s in sys_.states),
        )
    return 0


def _cmd_validate(args) -> int:
    left, right = _load_system(args.left), _load_system(args.right)
    try:
        with open(args.cert, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(EX_DATA, f"cannot read {args.cert}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EX_DATA, f"{args.cert}: invalid JSON: {exc}") from None
    try:
        cert = certificate_from_document(doc, left, right)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EX_DATA, f"{args.cert}: malformed certificate: {exc}") from None
    ok = recheck(cert, left, right)
    _emit(args, {"valid": ok}, "valid" if ok else "invalid")
    return 0 if ok else 1


def _cmd_oracle(args) -> int:
    left, right = _load_system(args.left), _load_system(args.right)
    _require_same_type(left, right)
    mods = _modalities(args, left, right)
    if args.oracle_command == "distance":
        matrix = exact_distance(left, right, mods, args.cap)
        table = {
            left.states[x]: {
                right.states[y]: format_value(matrix.at(x, y)) for y in range(right.n)
            }
            for x in range(left.n)
        }
        human = "\n".join(
            f"{lx} -> {ry}: {table[lx][ry]}" for lx in left.states for ry in right.states
        )
        _emit(args, {"distance_matrix": table}, human)
        return 0
    if args.oracle_command == "simulation":
        eps = _eps(args.eps)
        rel = greatest_simulation(left, right, mods, eps, args.cap)
        pairs = [[left.states[x], right.states[y]] for x, y in rel.pairs()]
        _emit(
            args,
            {"eps": format_value(eps), "simulation": pairs},
            "\n".join(f"{a} <= {b}" for a, b in pairs) if pairs else "(empty)",
        )
        return 0
    raise CliError(EX_CONTRACT, f"unknown oracle command {args.oracle_command!r}")


_COMMANDS = {
    "check": _cmd_check,
    "distance": _cmd_distance,
    "distinguish": _cmd_distinguish,
    "eval": _cmd_eval,
    "validate": _cmd_validate,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return exc.code
    except OracleCapExceededError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EX_CAP
    except ModalityMismatchError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EX_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
