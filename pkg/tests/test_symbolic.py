from fractions import Fraction

import numpy as np
import pytest
import sympy

from charwave.symbolic import (Alphabet, Expr, ParseError, UnboundSymbolError, UnknownSymbolError, collect,
                               diff, evaluate, parse, simplify, substitute)

A = Alphabet(["x", "t"], ["u", "v"], max_order=1, parameters=["a", "b", "c"])


def test_parse_system1_first_equation():
    e = parse("u_t + 2*u*u_x - v_x", A)
    assert len(e) == 3
    assert e.coefficient((("u", 1), ("u_x", 1))) == 2


@pytest.mark.parametrize("text", ["0", "(u+1)^2 - u^2 - 2*u - 1", "x**3 - x*x*x"])
def test_parse_zero(text):
    assert parse(text, A).is_zero()


def test_parse_accepts_unsorted_jet_index():
    B = Alphabet(["x", "t"], ["u"], max_order=2)
    assert parse("u_tx", B) == parse("u_xt", B)


@pytest.mark.parametrize("text", ["u +", "(u", "u ^ v", "u / v", "2 3"])
def test_parse_errors(text):
    with pytest.raises((ParseError, Exception)):
        parse(text, A)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError):
        parse("w + 1", A)
    with pytest.raises(UnknownSymbolError):
        parse("u_xx", A)


def test_rational_coefficients():
    e = parse("u^3/3 - u", A)
    assert e.coefficient((("u", 3),)) == Fraction(1, 3)
    assert parse("0.5*u", A).coefficient((("u", 1),)) == Fraction(1, 2)


def test_diff_examples():
    assert diff(parse("u^2 - v", A), "u") == parse("2*u", A)
    assert diff(parse("7", A), "x").is_zero()
    assert diff(parse("x^3*t^2", A), "x") == parse("3*x^2*t^2", A)


def test_substitute_examples():
    eq = parse("u_t + 2*u*u_x - v_x", A)
    assert substitute(eq, {"u_t": parse("-2*u*u_x + v_x", A)}).is_zero()
    assert substitute(eq, {}) == eq
    assert substitute(parse("u*v", A), {"u": 2, "v": 3}) == Expr.const(6)


def test_substitution_is_simultaneous():
    e = parse("u + 2*v", A)
    assert substitute(e, {"u": parse("v", A), "v": parse("u", A)}) == parse("v + 2*u", A)


def test_evaluate_examples():
    assert evaluate(parse("u^2 - v", A), {"u": 2, "v": 1}) == 3
    assert evaluate(parse("0", A), {}) == 0
    with pytest.raises(UnboundSymbolError):
        evaluate(parse("u + v", A), {"u": 1.0})


def test_evaluate_matches_direct_arithmetic():
    rng = np.random.default_rng(0)
    e = parse("u_t + 2*u*u_x - v_x", A)
    for _ in range(20):
        u, ut, ux, vx = rng.normal(size=4)
        assert evaluate(e, {"u": u, "u_t": ut, "u_x": ux, "v_x": vx}) == pytest.approx(ut + 2 * u * ux - vx)


def test_evaluate_arrays_and_compile():
    e = parse("u^2*v - 3*u + 1", A)
    u = np.linspace(-1, 1, 7)
    v = np.linspace(2, 3, 7)
    expected = u ** 2 * v - 3 * u + 1
    assert np.allclose(e.evaluate({"u": u, "v": v}), expected)
    assert np.allclose(e.compile(["u", "v"])(u, v), expected)


def test_collect_examples():
    e = parse("a*u_x + b*v_x + c", A)
    groups = collect(e, ["u_x", "v_x"])
    assert groups == {parse("u_x", A): parse("a", A), parse("v_x", A): parse("b", A),
                      Expr.const(1): parse("c", A)}
    assert collect(parse("0", A), ["u_x"]) == {}


def test_arithmetic_agrees_with_sympy():
    rng = np.random.default_rng(1)
    names = ["x", "t", "u", "v"]
    syms = sympy.symbols(names)
    for _ in range(10):
        polys = []
        for _ in range(2):
            terms = []
            for _ in range(4):
                exps = rng.integers(0, 3, size=4)
                coef = int(rng.integers(-5, 6))
                terms.append((coef, exps))
            polys.append(terms)

        def to_text(terms):
            return " + ".join(f"({c})*" + "*".join(f"{n}^{k}" for n, k in zip(names, exps)) for c, exps in terms)

        p, q = (parse(to_text(t), A) for t in polys)
        sp, sq = (sympy.sympify(to_text(t).replace("^", "**")) for t in polys)
        for ours, theirs in [(p * q - q ** 2, sp * sq - sq ** 2), (p.diff("u") + q.diff("x"),
                                                                     sympy.diff(sp, syms[2]) + sympy.diff(sq, syms[0]))]:
            assert sympy.expand(sympy.sympify(ours.to_string().replace("^", "**")) - theirs) == 0


def test_printing_is_canonical():
    e = parse("u*u_x*2 + x^2 - 1", A)
    assert e.to_string() == simplify(parse("x^2 + 2*u*u_x - 1", A)).to_string()
    assert str(parse("0", A)) == "0"


def test_division_by_expression_rejected():
    with pytest.raises(Exception):
        parse("u", A) / parse("v", A)
    assert (parse("4*u", A) / 2) == parse("2*u", A)
