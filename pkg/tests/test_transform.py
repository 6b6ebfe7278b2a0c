import logging
import math
from fractions import Fraction

import pytest
from scipy.integrate import quad

from lienard_sym.errors import DegenerateForce, PullbackUnavailable, UnknownSymbol
from lienard_sym.evaluate import Interval, is_identically_zero
from lienard_sym.expr import ONE, Constant, Variable
from lienard_sym.normalize import is_zero_symbolic, normalize
from lienard_sym.parse import parse
from lienard_sym.transform import (M_SYMBOL, LienardInput, d_dy, integrating_factor, invariant_K,
                                   lienard_from_canonical, phi, pullback_force, transform)


def n(text, **kwargs):
    return normalize(parse(text, **kwargs))


def test_input_is_normalized():
    input = LienardInput.from_text("x - x", "(x + 1)^2")
    assert input.f == Constant(0)
    assert input.g == n("x^2 + 2*x + 1")


def test_input_rejects_other_variables():
    with pytest.raises(UnknownSymbol):
        LienardInput(parse("y", var="y"), parse("x"))
    with pytest.raises(UnknownSymbol):
        LienardInput.from_text("0", "t*x")


def test_reciprocal_damping():
    data = transform(LienardInput.from_text("1/x", "x/2"))
    assert data.M == Variable("x")
    assert data.phi == n("x^2/2")
    assert data.G == n("x^2/2")
    assert data.force_derivative(1) == ONE
    assert data.phi_value(2.0) == pytest.approx(2.0)
    assert not data.numeric_only


def test_closed_forms():
    assert integrating_factor(parse("1")) == n("exp(x)")
    assert integrating_factor(parse("2/x")) == n("x^2")
    assert phi(parse("0")) == Variable("x")
    assert integrating_factor(parse("exp(x^2)")) is None
    assert phi(parse("2*x")) is None
    assert pullback_force(LienardInput.from_text("1", "exp(-4*x)")) == n("exp(-3*x)")


def test_phi_by_quadrature():
    data = transform(LienardInput.from_text("2*x", "x"))
    assert data.phi is None
    assert data.M == n("exp(x^2)")
    expected, _ = quad(lambda x: math.exp(x * x), 1.0, 1.5)
    assert data.phi_value(1.5) == pytest.approx(expected, rel=1e-8)
    assert data.summary()["phi"] == "numeric"


def test_numeric_only_mode(caplog):
    with caplog.at_level(logging.WARNING, logger="lienard_sym"):
        data = transform(LienardInput.from_text("exp(x^2)", "x"))
    assert data.numeric_only
    assert "numeric-only" in caplog.text
    assert data.M == Variable(M_SYMBOL)
    assert data.extra is not None and M_SYMBOL in data.extra
    assert data.M_value(1.0) == pytest.approx(1.0)


def test_forced_numeric_only_mode():
    data = transform(LienardInput.from_text("0", "x^3"), numeric_only=True)
    assert data.M_value(1.5) == pytest.approx(1.0)
    assert data.phi_value(1.5) == pytest.approx(0.5)
    assert d_dy(data.G, data) == n("3*x^2")
    assert data.summary()["G"] == "numeric"


@pytest.mark.parametrize("g, K", [
    ("x^3", Fraction(2, 3)),
    ("exp(2*x)", Fraction(1)),
    ("x^(-3)", Fraction(4, 3)),
])
def test_invariant_K(g, K):
    assert invariant_K(transform(LienardInput.from_text("0", g))) == Constant(K)


def test_invariant_K_along_a_transformation():
    # G = exp(-3x) = y^(-3) with y = exp(x)
    assert invariant_K(transform(LienardInput.from_text("1", "exp(-4*x)"))) == Constant(Fraction(4, 3))


def test_invariant_K_with_named_constants():
    exponential = LienardInput.from_text("0", "exp(k*x)", constants=("k",))
    assert invariant_K(transform(exponential)) == ONE
    # (a + b*y)^n with a symbolic exponent
    power = LienardInput.from_text("0", "exp(n*log(a + b*x))", constants=("a", "b", "n"))
    assert invariant_K(transform(power)) == n("(n - 1)/n", constants=("n",))
    cubic = LienardInput.from_text("0", "(a + b*x)^3", constants=("a", "b"))
    K = invariant_K(transform(cubic))
    assert is_zero_symbolic(K - Constant(Fraction(2, 3)))


def test_invariant_K_reports_its_zero_tests():
    seen = []

    def zero_test(name, e):
        seen.append(name)
        return is_identically_zero(e)

    invariant_K(transform(LienardInput.from_text("0", "x^3")), zero_test=zero_test)
    assert seen == ["F ≡ 0 (K)", "F' ≡ 0 (K)"]


@pytest.mark.parametrize("g", ["0", "2"])
def test_invariant_K_of_degenerate_forces(g):
    with pytest.raises(DegenerateForce):
        invariant_K(transform(LienardInput.from_text("0", g)))


def test_lienard_from_canonical():
    assert lienard_from_canonical(parse("y", "y"), parse("1/x")) == n("x/2")
    assert lienard_from_canonical(parse("y^(-3)", "y"), parse("1")) == n("exp(-4*x)")
    with pytest.raises(PullbackUnavailable):
        lienard_from_canonical(parse("y", "y"), parse("exp(x^2)"))


def test_custom_domain():
    input = LienardInput.from_text("0", "x", domain=Interval(-1, 1))
    assert transform(input).domain == Interval(-1, 1)
