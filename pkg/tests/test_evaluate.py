import math

import numpy as np
import pytest

from lienard_sym.errors import DomainError, UnboundSymbol
from lienard_sym.evaluate import (DEFAULT_DOMAIN, GUARD_BAND, Grade, Interval, TriState, as_float, eval_expr,
                                  guarded_poles, is_constant, is_identically_zero, sample_points, sample_values,
                                  spread_decision)
from lienard_sym.expr import Constant, NamedConstant
from lienard_sym.parse import parse


def test_eval_expr():
    assert eval_expr(parse("x^2 + 1"), x=2.0) == 5.0
    assert eval_expr(parse("exp(log(x))"), {"x": 3.0}) == pytest.approx(3.0)
    assert eval_expr(parse("x^(1/3)"), x=-8.0) == pytest.approx(-2.0)
    assert eval_expr(parse("x^(2/3)"), x=-8.0) == pytest.approx(4.0)


@pytest.mark.parametrize("text, x", [("log(x)", -1.0), ("1/x", 0.0), ("x^(1/2)", -4.0), ("exp(x)", 1e4)])
def test_eval_outside_the_domain(text, x):
    with pytest.raises(DomainError):
        eval_expr(parse(text), x=x)


def test_unbound_symbol():
    with pytest.raises(UnboundSymbol) as info:
        eval_expr(parse("a*x", constants=("a",)), x=1.0)
    assert info.value.name == "a"


def test_interval():
    interval = Interval.from_text("(0:1]")
    assert not interval.contains(0.0)
    assert interval.contains(1.0)
    assert str(interval) == "(0, 1]"
    assert Interval.from_text("1:3").width == 2.0
    for text in ("2:1", "1", "0:inf"):
        with pytest.raises(ValueError):
            Interval.from_text(text)


def test_sample_points_are_deterministic_and_inside():
    points = sample_points(DEFAULT_DOMAIN, 16, dims=2)
    assert points.shape == (16, 2)
    assert np.all((points[:, 0] > 1.0) & (points[:, 0] < 2.0))
    assert np.all((points[:, 1] >= 1.0) & (points[:, 1] <= 2.0))
    np.testing.assert_array_equal(points, sample_points(DEFAULT_DOMAIN, 16, dims=2))


def test_zero_decisions():
    decision = is_identically_zero(parse("x - x"))
    assert decision.yes and decision.grade is Grade.SYMBOLIC
    decision = is_identically_zero(parse("3*exp(x)"))
    assert decision.no and decision.grade is Grade.SYMBOLIC
    decision = is_identically_zero(parse("exp(x) - x"))
    assert decision.no and decision.grade is Grade.NUMERIC


def test_zero_decision_without_symbolic_pass():
    decision = is_identically_zero(parse("log(2*x) - log(x) - log(2)"), symbolic=False)
    assert decision.yes and decision.grade is Grade.NUMERIC


def test_zero_decision_unknown_when_nothing_evaluates():
    decision = is_identically_zero(parse("log(x - 3) + x"))
    assert decision.state is TriState.UNKNOWN
    assert is_identically_zero(parse("exp(x) - x"), numeric=False).unknown


def test_zero_decision_with_named_constants():
    assert is_identically_zero(parse("a*x - x*a", constants=("a",))).yes
    decision = is_identically_zero(parse("a*exp(x) - a*x", constants=("a",)))
    assert decision.no


def test_constant_decisions():
    decision = is_constant(parse("2*(x + 1)/(x + 1)"))
    assert decision.yes and decision.value == Constant(2)
    decision = is_constant(parse("a + 1", constants=("a",)))
    assert decision.yes and decision.grade is Grade.SYMBOLIC
    assert as_float(decision.value, {"a": 2.0}) == 3.0
    assert is_constant(parse("exp(x)")).no


def test_constant_without_closed_form():
    decision = is_constant(parse("log(2*x) - log(x)"))
    assert decision.yes and decision.grade is Grade.SYMBOLIC
    assert decision.value == pytest.approx(math.log(2))


def test_spread_decision():
    values = np.array([1.0, 1.0 + 1e-12, np.nan, 1.0])
    decision = spread_decision(values, 4, 1e-9)
    assert decision.yes and decision.value == pytest.approx(1.0)
    assert spread_decision(np.array([1.0, 2.0]), 2, 1e-9).no
    assert spread_decision(np.array([np.nan, np.nan, 1.0]), 3, 1e-9).unknown


def test_as_float():
    assert math.isnan(as_float(None))
    assert as_float(Constant(3)) == 3.0
    assert as_float(NamedConstant("b"), {"b": 1.5}) == 1.5
    assert as_float(0.25) == 0.25


def test_sampling_drops_the_guard_band_of_a_pole():
    e = parse("1/(x - 3/2)")
    assert guarded_poles(e, "x", DEFAULT_DOMAIN) == pytest.approx((1.5,))
    assert guarded_poles(parse("x^2 + 1"), "x", DEFAULT_DOMAIN) == ()
    xs, values, _ = sample_values(e, "x", DEFAULT_DOMAIN)
    valid = ~np.isnan(values)
    assert 0 < valid.sum() < len(values)
    assert np.all(np.abs(xs[valid] - 1.5) >= GUARD_BAND)
    assert np.all(np.abs(values[valid]) <= 1 / GUARD_BAND + 1e-9)
    assert is_identically_zero(parse("1/(x - 3/2) - (x - 3/2)^(-1)")).yes
