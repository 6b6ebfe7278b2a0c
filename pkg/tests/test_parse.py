from fractions import Fraction

import pytest

from lienard_sym.errors import ExprSyntaxError, LienardError, UnknownSymbol
from lienard_sym.expr import Constant, Exp, Log, NamedConstant, Neg, Power, Product, Sum, Variable
from lienard_sym.parse import parse, tokenize

X = Variable("x")


def test_tokenize_positions():
    tokens = tokenize("2*x + 1.5")
    assert [(t.kind, t.text, t.position) for t in tokens] == [
        ("number", "2", 0), ("op", "*", 1), ("ident", "x", 2), ("op", "+", 4), ("number", "1.5", 6), ("end", "", 9)]


def test_precedence():
    assert parse("2*x + 1") == Sum((Product((Constant(2), X)), Constant(1)))
    assert parse("x - 1") == Sum((X, Neg(Constant(1))))
    assert parse("-x^2") == Neg(Power(X, Constant(2)))
    assert parse("x/2") == Product((X, Power(Constant(2), Constant(-1))))


def test_rational_exponents():
    assert parse("x^(1/2)") == Power(X, Constant(Fraction(1, 2)))
    assert parse("x^-2") == Power(X, Constant(-2))
    assert parse("x^(-3/4)") == Power(X, Constant(Fraction(-3, 4)))
    assert parse("x^1.5") == Power(X, Constant(Fraction(3, 2)))


def test_functions_and_e():
    assert parse("exp(log(x))") == Exp(Log(X))
    assert parse("e") == Exp(Constant(1))


def test_decimals_are_exact():
    assert parse("0.1") == Constant(Fraction(1, 10))


def test_named_constants_and_several_variables():
    assert parse("a*y", var="y", constants=("a",)) == Product((NamedConstant("a"), Variable("y")))
    assert parse("t*y", var=("t", "y")) == Product((Variable("t"), Variable("y")))


def test_time_is_not_a_variable():
    with pytest.raises(UnknownSymbol) as info:
        parse("t*x")
    assert info.value.name == "t"
    assert info.value.position == 0
    assert "UnknownSymbol('t')" in str(info.value)


@pytest.mark.parametrize("text, position", [
    ("x +", 3),
    ("x $ 1", 2),
    ("(x + 1", 6),
    ("x^y", 2),
    ("2^(1/0)", 2),
    ("x 2", 2),
    ("exp x", 4),
])
def test_syntax_errors_carry_position(text, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.position == position
    assert f"at position {position}" in str(info.value)


def test_errors_share_a_base_class():
    for text in ("x +", "z"):
        with pytest.raises(LienardError):
            parse(text)
