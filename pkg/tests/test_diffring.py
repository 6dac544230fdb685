"""Ring laws, derivation, parsing, formatting, and evaluation of DiffPoly."""

import json
import random
from fractions import Fraction

import pytest

from odelift.diffring import (
    DiffPoly,
    DiffSymbol,
    MissingSymbolError,
    Monomial,
    P,
    PolyParseError,
    Q,
    format_poly,
    parse_poly,
    poly_terms_doc,
)

SYMBOL_POOL = [P(0), P(1), P(2), Q(0), Q(1), Q(2)]


def random_poly(rng: random.Random, max_terms: int = 4) -> DiffPoly:
    total = DiffPoly.zero()
    for _ in range(rng.randint(0, max_terms)):
        coeff = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        term = DiffPoly.const(coeff)
        for _ in range(rng.randint(0, 3)):
            term = term * DiffPoly.symbol(rng.choice(SYMBOL_POOL))
        total = total + term
    return total


# -- symbols and monomial order ---------------------------------------------


def test_symbol_names_and_derivation():
    assert P().name == "p"
    assert Q(2).name == "q''"
    assert P(1).derived() == P(2)
    with pytest.raises(ValueError):
        P(-1)


def test_symbol_order_p_before_q_ascending_order():
    assert P(0) < P(1) < P(5) < Q(0) < Q(1)


def test_monomial_order_graded_then_lex():
    one = Monomial()
    p = Monomial({P(): 1})
    q = Monomial({Q(): 1})
    p2 = Monomial({P(): 2})
    pq = Monomial({P(): 1, Q(): 1})
    assert one < q < p
    assert p < p2
    assert q < pq < p2
    # same degree: the earliest symbol with a differing exponent decides
    assert Monomial({P(1): 1}) > Monomial({Q(): 1})
    assert Monomial({P(): 1, P(1): 1}) > Monomial({P(): 1, Q(): 1})


def test_monomial_rejects_bad_exponents():
    with pytest.raises(ValueError):
        Monomial({P(): -1})
    assert Monomial({P(): 0}) == Monomial()


# -- ring operations ----------------------------------------------------------


def test_add_examples():
    p = DiffPoly.symbol(P())
    assert p + (-p) == DiffPoly.zero()
    assert parse_poly("4*q - 2*p^2") + parse_poly("p'") == parse_poly("4*q - 2*p^2 + p'")
    assert parse_poly("3*p") + parse_poly("3*p") == parse_poly("6*p")


def test_mul_examples():
    assert parse_poly("p + q") * parse_poly("p - q") == parse_poly("p^2 - q^2")
    assert parse_poly("2*q") * parse_poly("3*p'") == parse_poly("6*p'*q")
    assert parse_poly("p") * DiffPoly.zero() == DiffPoly.zero()


def test_ring_laws_random():
    rng = random.Random(20260816)
    for _ in range(60):
        a, b, c = (random_poly(rng) for _ in range(3))
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + DiffPoly.zero() == a
        assert a * DiffPoly.const(1) == a


def test_normalization_no_zero_terms():
    rng = random.Random(7)
    for _ in range(40):
        a, b = random_poly(rng), random_poly(rng)
        for out in (a + b, a - b, a * b, a.derive(), -a):
            assert all(coeff != 0 for coeff in out.terms.values())


def test_scalar_arithmetic_exact():
    a = parse_poly("7*p*p'")
    assert a / 7 == parse_poly("p*p'")
    assert a / 2 == Fraction(7, 2) * parse_poly("p*p'")
    assert 2 * a == parse_poly("14*p*p'")
    with pytest.raises(ZeroDivisionError):
        a / 0


def test_pow():
    assert parse_poly("p + q") ** 2 == parse_poly("p^2 + 2*p*q + q^2")
    assert parse_poly("p") ** 0 == DiffPoly.const(1)
    with pytest.raises(ValueError):
        parse_poly("p") ** -1


# -- derivation ---------------------------------------------------------------


def test_derive_examples():
    assert DiffPoly.symbol(P()).derive() == DiffPoly.symbol(P(1))
    assert parse_poly("p^2*q").derive() == parse_poly("2*p*p'*q + p^2*q'")
    assert parse_poly("q' - 2*p*q").derive() == parse_poly("q'' - 2*p'*q - 2*p*q'")
    assert DiffPoly.const(5).derive() == DiffPoly.zero()


def test_derive_leibniz_and_linear_random():
    rng = random.Random(99)
    for _ in range(40):
        a, b = random_poly(rng), random_poly(rng)
        assert (a * b).derive() == a.derive() * b + a * b.derive()
        alpha, beta = Fraction(3, 2), Fraction(-5)
        assert (alpha * a + beta * b).derive() == alpha * a.derive() + beta * b.derive()


# -- evaluation ---------------------------------------------------------------


def test_eval_examples():
    poly = parse_poly("4*q - 2*p^2 + p'")
    assert poly.eval({P(0): 0.0, Q(0): -1.0, P(1): 0.0}) == -4.0
    assert DiffPoly.zero().eval({}) == 0.0
    assert parse_poly("-10*p").eval({P(0): 2.0}) == -20.0


def test_eval_missing_symbol():
    with pytest.raises(MissingSymbolError) as exc:
        parse_poly("p*q'").eval({P(0): 1.0})
    assert exc.value.symbol == Q(1)
    assert "q'" in str(exc.value)


def test_eval_homomorphism_random():
    rng = random.Random(4242)
    checked = 0
    for _ in range(5000):
        if checked >= 50:
            break
        a, b = random_poly(rng), random_poly(rng)
        assignment = {sym: rng.uniform(-2.0, 2.0) for sym in SYMBOL_POOL}
        va, vb = a.eval(assignment), b.eval(assignment)
        vs = (a + b).eval(assignment)
        vp = (a * b).eval(assignment)
        if not all(1e-3 <= abs(v) <= 1e3 for v in (va, vb, vs, vp)):
            continue
        assert abs(vs - (va + vb)) <= 1e-12 * max(abs(vs), abs(va) + abs(vb))
        assert abs(vp - va * vb) <= 1e-12 * max(abs(vp), abs(va * vb))
        checked += 1
    assert checked >= 50


def test_eval_exact_is_exact():
    poly = parse_poly("4*p*q - 2*q'")
    values = {P(0): Fraction(1, 3), Q(0): Fraction(2, 7), Q(1): Fraction(-1, 2)}
    assert poly.eval_exact(values) == Fraction(4, 1) * Fraction(1, 3) * Fraction(2, 7) + 1
    rng = random.Random(11)
    for _ in range(20):
        a, b = random_poly(rng), random_poly(rng)
        assignment = {
            sym: Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for sym in SYMBOL_POOL
        }
        assert (a * b).eval_exact(assignment) == a.eval_exact(assignment) * b.eval_exact(
            assignment
        )


# -- parsing ------------------------------------------------------------------


def test_parse_examples():
    poly = parse_poly("11*p^2 - 4*p' - 10*q")
    assert len(poly.terms) == 3
    assert parse_poly("0") == DiffPoly.zero()
    assert parse_poly("2*(q' - 2*p*q)") == parse_poly("2*q' - 4*p*q")


def test_parse_rational_and_deep_primes():
    assert parse_poly("3/4*p''''' + 1/4*p'''''") == DiffPoly.symbol(DiffSymbol("p", 5))
    assert parse_poly("1/2") == DiffPoly.const(Fraction(1, 2))


def test_parse_errors_carry_position():
    for text, pos in [("p q", 2), ("2*^3", 2), ("(p", 2), ("p^0", 2), ("p^-2", 2), ("", 0)]:
        with pytest.raises(PolyParseError) as exc:
            parse_poly(text)
        assert exc.value.position == pos, text


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(PolyParseError):
        parse_poly("2p")
    with pytest.raises(PolyParseError):
        parse_poly("p(q)")


# -- formatting ---------------------------------------------------------------


def test_format_zero_and_latex_example():
    assert format_poly(DiffPoly.zero(), "plain") == "0"
    assert format_poly(DiffPoly.zero(), "latex") == "0"
    assert format_poly(parse_poly("-10*p"), "latex") == "-10p"


def test_format_latex_primes_and_powers():
    assert format_poly(parse_poly("2*p^2 - p' - 4*q"), "latex") == "2p^{2} - p' - 4q"
    assert format_poly(parse_poly("7*p'^2"), "latex") == "7{p'}^{2}"
    assert format_poly(parse_poly("1/2*q''''"), "latex") == "\\frac{1}{2}q^{(iv)}"
    assert format_poly(DiffPoly.symbol(DiffSymbol("q", 6)), "latex") == "q^{(6)}"


def test_format_plain_round_trip_random():
    rng = random.Random(2024)
    for _ in range(80):
        poly = random_poly(rng, max_terms=6)
        assert parse_poly(format_poly(poly, "plain")) == poly


def test_format_unknown_style():
    with pytest.raises(ValueError):
        format_poly(DiffPoly.zero(), "yaml")


def test_json_terms_doc_schema_and_order():
    poly = parse_poly("2*p^2 - p' - 4*q")
    doc = poly_terms_doc(poly)
    assert doc == [
        {"num": "2", "den": "1", "monomial": [{"sym": "p", "order": 0, "exp": 2}]},
        {"num": "-1", "den": "1", "monomial": [{"sym": "p", "order": 1, "exp": 1}]},
        {"num": "-4", "den": "1", "monomial": [{"sym": "q", "order": 0, "exp": 1}]},
    ]
    parsed = json.loads(format_poly(poly, "json"))
    assert parsed == doc


def test_poly_equality_with_scalars():
    assert DiffPoly.const(3) == 3
    assert DiffPoly.zero() == 0
    assert parse_poly("p") != 1
