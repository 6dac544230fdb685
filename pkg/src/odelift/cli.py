"""Command-line front end: derive, check tables, verify numerically.

Three subcommands:

    derive       print the monic lifted equation for a given power
    check-paper  compare the derivation against the bundled reference
                 coefficient tables
    verify       integrate a concrete base equation and run the full
                 residual / Wronskian report

Exit codes: 0 pass, 1 mismatch or numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .diffring import MissingSymbolError, format_poly, poly_terms_doc
from .exprparse import Expr, ExprDomainError, ExprSyntaxError, parse_expr
from .lifting import (
    FIXTURE_ORDERS,
    FixtureFormatError,
    check_against_fixture,
    derive_lifted_ode,
    load_fixture,
)
from .verify import ConfigError, NumericConfig, basis_check

__all__ = ["main", "build_parser", "ode_json_doc", "canonical_json"]


def ode_json_doc(m: int) -> dict:
    """Machine-readable document for the derived order-(m+1) equation."""
    ode = derive_lifted_ode(m)
    return {
        "m": m,
        "monic": True,
        "coeffs": [
            {"k": k, "terms": poly_terms_doc(c)} for k, c in enumerate(ode.coeffs)
        ],
    }


def canonical_json(doc) -> str:
    """Single serialization used everywhere, so load-then-dump is stable."""
    return json.dumps(doc, sort_keys=True, indent=2)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"m must be >= 1, got {value}")
    return value


def _expression(text: str) -> Expr:
    try:
        return parse_expr(text)
    except ExprSyntaxError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odelift",
        description=(
            "Derive the monic linear equation of order m+1 satisfied by m-th "
            "powers of solutions of y'' = p(x)y' + q(x)y, and verify it "
            "symbolically and numerically."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="print the lifted equation's coefficients")
    d.add_argument("-m", type=_positive_int, required=True, help="power m >= 1")
    d.add_argument(
        "--style",
        choices=("plain", "latex", "json"),
        default="plain",
        help="output style (default plain)",
    )
    d.set_defaults(handler=_run_derive)

    c = sub.add_parser(
        "check-paper",
        help="compare the derivation against the bundled reference tables",
    )
    group = c.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "-m",
        type=int,
        choices=FIXTURE_ORDERS,
        help="single table to check (2-5)",
    )
    group.add_argument("--all", action="store_true", help="check all four tables")
    c.add_argument(
        "--fixtures",
        metavar="DIR",
        default=None,
        help="read tables from DIR instead of the bundled copies",
    )
    c.set_defaults(handler=_run_check)

    v = sub.add_parser(
        "verify", help="integrate a base equation and test the lifted one"
    )
    v.add_argument("-m", type=_positive_int, required=True, help="power m >= 1")
    v.add_argument("--p", type=_expression, required=True, help="p(x), e.g. 'sin(x)'")
    v.add_argument("--q", type=_expression, required=True, help="q(x), e.g. 'x'")
    v.add_argument(
        "--interval",
        nargs=2,
        type=float,
        default=(0.0, 1.0),
        metavar=("A", "B"),
        help="integration interval (default 0 1)",
    )
    v.add_argument("--step", type=float, default=1e-3, help="grid step (default 1e-3)")
    v.add_argument(
        "--ic-f",
        nargs=2,
        type=float,
        default=(1.0, 0.0),
        metavar=("F", "FP"),
        help="initial value and derivative of f (default 1 0)",
    )
    v.add_argument(
        "--ic-g",
        nargs=2,
        type=float,
        default=(0.0, 1.0),
        metavar=("G", "GP"),
        help="initial value and derivative of g (default 0 1)",
    )
    v.add_argument(
        "--tol-residual",
        type=float,
        default=1e-6,
        help="max relative residual allowed (default 1e-6)",
    )
    v.add_argument(
        "--tol-wronskian",
        type=float,
        default=1e-8,
        help="scaled Wronskian threshold (default 1e-8)",
    )
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.set_defaults(handler=_run_verify)
    return parser


def _run_derive(args) -> int:
    if args.style == "json":
        print(canonical_json(ode_json_doc(args.m)))
        return 0
    ode = derive_lifted_ode(args.m)
    for k in range(args.m, -1, -1):
        if args.style == "latex":
            print(f"c_{{{k}}} = {format_poly(ode.coeffs[k], 'latex')}")
        else:
            print(f"c_{k} = {format_poly(ode.coeffs[k], 'plain')}")
    return 0


def _run_check(args) -> int:
    orders = FIXTURE_ORDERS if args.all else (args.m,)
    ok = True
    for m in orders:
        report = check_against_fixture(m, load_fixture(m, args.fixtures))
        print(report.summary())
        ok = ok and report.passed
    return 0 if ok else 1


def _run_verify(args) -> int:
    cfg = NumericConfig(
        interval=tuple(args.interval),
        step=args.step,
        ic_f=tuple(args.ic_f),
        ic_g=tuple(args.ic_g),
    )
    ode = derive_lifted_ode(args.m)
    report = basis_check(
        ode,
        args.p,
        args.q,
        cfg,
        residual_tol=args.tol_residual,
        wronskian_tol=args.tol_wronskian,
    )
    if args.json:
        doc = {
            "m": report.m,
            "p": args.p_text,
            "q": args.q_text,
            "interval": list(report.interval),
            "h": report.step,
            "residuals": [
                {
                    "monomial": r.label,
                    "i": r.i,
                    "j": r.j,
                    "max_residual": r.max_residual,
                    "pass": r.passed,
                }
                for r in report.residuals
            ],
            "wronskian": {
                "value": report.wronskian,
                "scale": report.wronskian_scale,
                "x": report.wronskian_x,
                "tolerance": report.wronskian_tol,
                "pass": report.wronskian_passed,
            },
            "pass": report.passed,
        }
        print(canonical_json(doc))
    else:
        print(report.summary())
    return 0 if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "p", None) is not None:
        # keep the original texts for the JSON report
        source = argv if argv is not None else sys.argv[1:]
        args.p_text, args.q_text = _flag_texts(source, "--p", "--q")
    try:
        return args.handler(args)
    except ConfigError as exc:
        parser.exit(2, f"error: {exc}\n")
    except (ExprDomainError, MissingSymbolError, FixtureFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _flag_texts(argv: Sequence[str], *flags: str) -> list:
    out = []
    for flag in flags:
        value = ""
        for i, token in enumerate(argv):
            if token == flag and i + 1 < len(argv):
                value = argv[i + 1]
            elif token.startswith(flag + "="):
                value = token[len(flag) + 1 :]
        out.append(value)
    return out
