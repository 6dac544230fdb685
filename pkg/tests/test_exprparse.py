"""Parsing, differentiation, evaluation, and printing of coefficient functions."""

import math
import random

import pytest

from odelift.exprparse import (
    Add,
    Call,
    Div,
    ExprDomainError,
    ExprSyntaxError,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    diff_expr,
    eval_expr,
    format_expr,
    parse_expr,
)


def test_parse_and_eval_basic():
    assert eval_expr(parse_expr("x^2 + 1"), 2.0) == 5.0
    assert eval_expr(parse_expr("2+3*4"), 0.0) == 14.0
    assert eval_expr(parse_expr("-x^2"), 3.0) == -9.0
    assert eval_expr(parse_expr("2-3-4"), 0.0) == -5.0
    assert eval_expr(parse_expr("2/4/2"), 0.0) == 0.25
    assert eval_expr(parse_expr("  sin( x ) "), 0.0) == 0.0


def test_parse_does_not_rewrite():
    assert parse_expr("0*x") == Mul(Num(0.0), Var())
    assert parse_expr("x^1") == Pow(Var(), 1)
    assert parse_expr("-x") == Neg(Var())
    assert parse_expr("x^-2") == Pow(Var(), -2)


def test_syntax_error_position_and_expectations():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("(x+")
    err = info.value
    assert err.position == 3
    assert err.found == "end of input"
    assert "number" in err.expected and "'x'" in err.expected
    assert "syntax error at offset 3" in str(err)


@pytest.mark.parametrize(
    "text,position",
    [
        ("", 0),
        ("2+", 2),
        ("x 2", 2),
        ("sin x", 4),
        ("x^2.5", 2),
        ("y+1", 0),
        ("1..", 0),
        ("x*", 2),
        ("(x+1", 4),
    ],
)
def test_syntax_error_positions(text, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.position == position


def test_node_validation():
    with pytest.raises(TypeError):
        Pow(Var(), 2.0)
    with pytest.raises(TypeError):
        Pow(Var(), True)
    with pytest.raises(ValueError):
        Call("tan", Var())


def test_diff_closed_forms():
    assert diff_expr(parse_expr("sin(x)")) == Call("cos", Var())
    assert eval_expr(diff_expr(parse_expr("x^3")), 2.0) == 12.0
    second = diff_expr(diff_expr(parse_expr("exp(-x)")))
    assert eval_expr(second, 0.0) == 1.0
    assert diff_expr(parse_expr("7")) == Num(0.0)
    assert diff_expr(parse_expr("ln(x)")) == Div(Num(1.0), Var())


@pytest.mark.parametrize(
    "text,x,fragment",
    [
        ("ln(x)", -1.0, "not positive"),
        ("ln(x)", 0.0, "not positive"),
        ("1/x", 0.0, "division by zero"),
        ("x^-2", 0.0, "zero raised to a negative power"),
        ("exp(x)", 1000.0, "overflow"),
    ],
)
def test_domain_errors(text, x, fragment):
    tree = parse_expr(text)
    with pytest.raises(ExprDomainError) as info:
        eval_expr(tree, x)
    err = info.value
    assert fragment in str(err)
    assert f"x={x!r}" in str(err)
    assert err.x == x


def test_domain_error_names_the_node():
    with pytest.raises(ExprDomainError) as info:
        eval_expr(parse_expr("x + 1/(x - 2)"), 2.0)
    assert info.value.node == Div(Num(1.0), Sub(Var(), Num(2.0)))
    assert str(info.value).startswith("1.0/(x - 2.0) undefined")


def test_format_precedence():
    assert format_expr(parse_expr("(x+1)*x")) == "(x + 1.0)*x"
    assert format_expr(parse_expr("x^2")) == "x^2"
    assert format_expr(Neg(Add(Var(), Num(1.0)))) == "-(x + 1.0)"
    assert format_expr(Sub(Var(), Sub(Var(), Num(1.0)))) == "x - (x - 1.0)"
    assert format_expr(Pow(Add(Var(), Num(1.0)), 3)) == "(x + 1.0)^3"
    assert format_expr(Pow(Var(), -2)) == "x^-2"
    assert format_expr(Num(-2.5)) == "-2.5"
    assert format_expr(Mul(Num(2.0), Neg(Var()))) == "2.0*-x"


# -- random property checks ---------------------------------------------------

FD_STEP = 1e-5
FD_REL = 1e-6
FD_ABS = 1e-8


def random_tree(rng, depth, funcs=("sin", "cos", "exp")):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([Num(float(rng.randint(1, 5))), Var(), Var()])
    kind = rng.randrange(7)
    child = lambda: random_tree(rng, depth - 1, funcs)
    if kind == 0:
        return Neg(child())
    if kind == 1:
        return Add(child(), child())
    if kind == 2:
        return Sub(child(), child())
    if kind == 3:
        return Mul(child(), child())
    if kind == 4:
        return Div(child(), child())
    if kind == 5:
        return Pow(child(), rng.choice([-2, -1, 2, 3]))
    return Call(rng.choice(funcs), child())


def _all_small(values, bound):
    return all(math.isfinite(v) and abs(v) <= bound for v in values)


def test_diff_matches_finite_differences():
    rng = random.Random(20260816)
    checked = 0
    for _ in range(4000):
        tree = random_tree(rng, rng.randint(1, 3))
        d = diff_expr(tree)
        d3 = diff_expr(diff_expr(d))
        x = rng.uniform(-2.0, 2.0)
        try:
            lo = eval_expr(tree, x - FD_STEP)
            hi = eval_expr(tree, x + FD_STEP)
            exact = eval_expr(d, x)
            spread = (eval_expr(d3, x - FD_STEP), eval_expr(d3, x + FD_STEP))
        except ExprDomainError:
            continue
        # keep only samples where truncation and rounding are provably
        # below the tolerance: small values and a tame third derivative
        if not _all_small((lo, hi, exact) + spread, 100.0):
            continue
        fd = (hi - lo) / (2.0 * FD_STEP)
        assert abs(exact - fd) <= FD_REL * max(abs(exact), abs(fd)) + FD_ABS
        checked += 1
        if checked >= 300:
            break
    assert checked >= 60


def test_format_parse_round_trip_is_structural():
    rng = random.Random(77)
    for _ in range(200):
        tree = random_tree(rng, rng.randint(0, 4))
        assert parse_expr(format_expr(tree)) == tree


def test_round_trip_preserves_values_after_folding():
    # derivatives introduce folded (possibly negative) literals; those
    # reparse as Neg of a positive literal, so compare by value
    rng = random.Random(31337)
    checked = 0
    for _ in range(2000):
        tree = diff_expr(random_tree(rng, rng.randint(1, 3)))
        reparsed = parse_expr(format_expr(tree))
        agreements = 0
        for _ in range(100):
            x = rng.uniform(-3.0, 3.0)
            try:
                a = eval_expr(tree, x)
                b = eval_expr(reparsed, x)
            except ExprDomainError:
                continue
            if not (math.isfinite(a) and math.isfinite(b)):
                continue
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))
            agreements += 1
        if agreements >= 20:
            checked += 1
        if checked >= 60:
            break
    assert checked >= 60


def test_repeated_differentiation_stays_exact_for_polynomials():
    tree = parse_expr("x^4 - 2*x^2 + 1")
    d = tree
    for _ in range(4):
        d = diff_expr(d)
    assert eval_expr(d, 17.3) == 24.0
    assert diff_expr(d) == Num(0.0)
