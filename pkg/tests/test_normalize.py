from fractions import Fraction

import pytest

from lienard_sym.expr import Constant, NamedConstant, Power
from lienard_sym.normalize import (MAX_EXPAND_DEGREE, as_numer_denom, constant_value, is_one, is_single_term,
                                   is_zero_symbolic, normalize, symbolic_ratio)
from lienard_sym.parse import parse


def n(text, **kwargs):
    return normalize(parse(text, **kwargs))


@pytest.mark.parametrize("left, right", [
    ("(x + 1)^2", "x^2 + 2*x + 1"),
    ("x*x", "x^2"),
    ("x + 1", "1 + x"),
    ("exp(log(x))", "x"),
    ("log(exp(x))", "x"),
    ("exp(x)*exp(x)", "exp(2*x)"),
    ("exp(x)/exp(x)", "1"),
    ("(x^2)^(1/2)", "x"),
    ("x^0", "1"),
    ("4^(1/2)", "2"),
    ("8^(1/3)", "2"),
    ("(1/4)^(-1/2)", "2"),
    ("exp(2*log(x))", "x^2"),
    ("2*(x + 1) - 2*x", "2"),
])
def test_equal_forms(left, right):
    assert n(left) == n(right)


def test_irrational_constants_stay_symbolic():
    assert n("2^(1/2)") == Power(Constant(2), Constant(Fraction(1, 2)))
    assert n("2^(1/2)*2^(1/2)") == Constant(2)


def test_idempotent():
    for text in ("(x + 1)^3*exp(x)", "log(x + 2)/(x + 1)^2", "x^(1/3) - 5*exp(-x)", "(x^2 + 1)^(-1/2)"):
        once = n(text)
        assert normalize(once) == once


def test_large_powers_of_sums_are_not_expanded():
    assert isinstance(n(f"(x + 1)^{MAX_EXPAND_DEGREE + 1}"), Power)
    assert not isinstance(n(f"(x + 1)^{MAX_EXPAND_DEGREE}"), Power)


def test_quotients():
    assert as_numer_denom(parse("1/(x + 1) + 1")) == (n("x + 2"), n("x + 1"))
    assert as_numer_denom(parse("x^2")) == (n("x^2"), Constant(1))


def test_zero_over_a_common_denominator():
    assert is_zero_symbolic(parse("1/(x + 1) - x/(x^2 + x)"))
    assert is_zero_symbolic(parse("(x - 1)/(x + 1) - 1 + 2/(x + 1)"))
    assert not is_zero_symbolic(parse("1/(x + 1) - 1/(x + 2)"))


def test_symbolic_ratio():
    assert symbolic_ratio(parse("(2*x + 2)/(x + 1)"), ["x"]) == Constant(2)
    assert symbolic_ratio(parse("x"), ["x"]) is None
    assert symbolic_ratio(parse("a*(x + 1)/(x + 1)", constants=("a",)), ["x"]) == NamedConstant("a")
    assert symbolic_ratio(parse("x - x"), ["x"]) == Constant(0)


def test_constant_value():
    assert constant_value(parse("3/6")) == Fraction(1, 2)
    assert constant_value(parse("x/x + 1")) == Fraction(2)
    assert constant_value(parse("x")) is None
    assert is_one(parse("x/x"))


def test_single_term():
    assert is_single_term(parse("x*exp(2*x)"))
    assert is_single_term(parse("3*(x + 1)^(-5)"))
    assert not is_single_term(parse("x + 1"))
    assert not is_single_term(parse("x - x"))


def test_named_constants_are_symbols():
    assert n("a*x + a*x", constants=("a",)) == n("2*a*x", constants=("a",))
    assert n("a/a", constants=("a",)) == Constant(1)
