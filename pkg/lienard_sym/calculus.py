import logging
import math
from fractions import Fraction
from functools import lru_cache, singledispatch
from typing import List, Optional, Tuple

from lienard_sym.errors import CannotIntegrate
from lienard_sym.expr import (MINUS_ONE, ONE, ZERO, Constant, Exp, Expr, Log, NamedConstant, Neg, Power, Product, Sum,
                              Variable, depends_on)
from lienard_sym.normalize import _collect, _term_expr, _to_expr, is_zero_symbolic, normalize

logger = logging.getLogger(__name__)


@singledispatch
def _derivative(e: Expr, var: str) -> Expr:
    raise TypeError(f"cannot differentiate a {type(e).__name__}")


@_derivative.register
def _(e: Constant, var: str) -> Expr:
    return ZERO


@_derivative.register
def _(e: NamedConstant, var: str) -> Expr:
    return ZERO


@_derivative.register
def _(e: Variable, var: str) -> Expr:
    return ONE if e.name == var else ZERO


@_derivative.register
def _(e: Sum, var: str) -> Expr:
    return Sum(tuple(_derivative(term, var) for term in e.terms))


@_derivative.register
def _(e: Product, var: str) -> Expr:
    # product rule
    terms = []
    for i, factor in enumerate(e.factors):
        if not depends_on(factor, (var,)):
            continue
        terms.append(Product(e.factors[:i] + (_derivative(factor, var),) + e.factors[i + 1:]))
    return Sum(tuple(terms)) if terms else ZERO


@_derivative.register
def _(e: Power, var: str) -> Expr:
    if depends_on(e.exponent, (var,)):
        return _derivative(Exp(Product((e.exponent, Log(e.base)))), var)
    reduced = Power(e.base, Sum((e.exponent, MINUS_ONE)))
    return Product((e.exponent, reduced, _derivative(e.base, var)))


@_derivative.register
def _(e: Exp, var: str) -> Expr:
    return Product((e, _derivative(e.arg, var)))


@_derivative.register
def _(e: Log, var: str) -> Expr:
    return Product((_derivative(e.arg, var), Power(e.arg, MINUS_ONE)))


@_derivative.register
def _(e: Neg, var: str) -> Expr:
    return Neg(_derivative(e.arg, var))


@lru_cache(maxsize=1 << 12)
def differentiate(e: Expr, var: str = "x") -> Expr:
    """
    Derivative with respect to a variable, every other variable held fixed.

    :param e: expression
    :param var: variable name, default is 'x'
    :return: canonical derivative
    """

    e = normalize(e)
    if not depends_on(e, (var,)):
        return ZERO
    return normalize(_derivative(e, var))


def _replace(e: Expr, var: str, replacement: Expr) -> Expr:
    if isinstance(e, Variable):
        return replacement if e.name == var else e
    if isinstance(e, Sum):
        return Sum(tuple(_replace(term, var, replacement) for term in e.terms))
    if isinstance(e, Product):
        return Product(tuple(_replace(factor, var, replacement) for factor in e.factors))
    if isinstance(e, Power):
        return Power(_replace(e.base, var, replacement), _replace(e.exponent, var, replacement))
    if isinstance(e, Exp):
        return Exp(_replace(e.arg, var, replacement))
    if isinstance(e, Log):
        return Log(_replace(e.arg, var, replacement))
    if isinstance(e, Neg):
        return Neg(_replace(e.arg, var, replacement))
    return e


def substitute(e: Expr, var: str, replacement) -> Expr:
    """
    Replace every occurrence of a variable and normalize.

    :param e: expression
    :param var: variable name
    :param replacement: expression (or number) put in place of the variable
    :return: canonical result
    """

    from lienard_sym.expr import as_expr
    return normalize(_replace(e, var, as_expr(replacement)))


# antiderivatives

def _affine(e: Expr, var: str) -> Optional[Tuple[Expr, Expr]]:
    """Write e = a + b*var with a, b free of var and b != 0."""

    a_terms, b_terms = {}, {}
    for mono, coeff in _collect(e).items():
        variable_part = [(base, exponent) for base, exponent in mono if depends_on(base, (var,))]
        rest = tuple((base, exponent) for base, exponent in mono if not depends_on(base, (var,)))
        if not variable_part:
            a_terms[rest] = coeff
        elif variable_part == [(Variable(var), 1)]:
            b_terms[rest] = coeff
        else:
            return None
    if not b_terms:
        return None
    return _to_expr(a_terms), _to_expr(b_terms)


def _split_monomial(mono, var: str):
    constant_part = tuple((base, exponent) for base, exponent in mono if not depends_on(base, (var,)))
    variable_part = [(base, exponent) for base, exponent in mono if depends_on(base, (var,))]
    return constant_part, variable_part


def _integrate_power(u: Expr, r: Fraction, slope: Expr) -> Expr:
    """Antiderivative of u^r where du/dvar = slope."""

    if r == -1:
        return Product((Log(u), Power(slope, MINUS_ONE)))
    return Product((Power(u, Constant(r + 1)), Constant(1 / (r + 1)), Power(slope, MINUS_ONE)))


def _integrate_polynomial_times_exp(degree: int, arg: Expr, k: Expr, var: str) -> Expr:
    # repeated integration by parts, x^m e^(kx + c)
    x = Variable(var)
    terms = []
    for j in range(degree + 1):
        coefficient = Fraction((-1) ** j * math.factorial(degree), math.factorial(degree - j))
        terms.append(Product((Constant(coefficient), Power(x, Constant(degree - j)),
                              Power(k, Constant(-(j + 1))))))
    return Product((Exp(arg), Sum(tuple(terms))))


def _integrate_term(variable_part: List, var: str) -> Expr:
    x = Variable(var)
    if not variable_part:
        return x
    powers_of_x = [exponent for base, exponent in variable_part if base == x]
    others = [(base, exponent) for base, exponent in variable_part if base != x]
    m = powers_of_x[0] if powers_of_x else Fraction(0)
    if not others:
        return _integrate_power(x, m, ONE)
    if len(others) != 1:
        raise CannotIntegrate(f"no rule for a product of {len(others)} non-trivial factors")
    base, exponent = others[0]
    if isinstance(base, Exp):
        affine = _affine(base.arg, var)
        if affine is None:
            raise CannotIntegrate(f"exponent {base.arg} is not affine in {var}")
        if m == 0:
            return Product((base, Power(affine[1], MINUS_ONE)))
        if m.denominator == 1 and 0 < m <= 12:
            return _integrate_polynomial_times_exp(int(m), base.arg, affine[1], var)
        raise CannotIntegrate(f"no rule for {var}^{m} times an exponential")
    affine = _affine(base, var)
    if affine is None:
        raise CannotIntegrate(f"{base} is not affine in {var}")
    a, b = affine
    if m == 0:
        return _integrate_power(base, exponent, b)
    if m.denominator != 1 or not 0 < m <= 12:
        raise CannotIntegrate(f"no rule for {var}^{m} times a power of {base}")
    # u = a + b x, x = (u - a)/b, dx = du/b
    u = Variable("_u")
    x_of_u = Product((Sum((u, Neg(a))), Power(b, MINUS_ONE)))
    integrand = normalize(Product((Power(x_of_u, Constant(m)), Power(u, Constant(exponent)), Power(b, MINUS_ONE))))
    result = ZERO
    for mono, coeff in _collect(integrand).items():
        constant_part, u_part = _split_monomial(mono, "_u")
        r = u_part[0][1] if u_part else Fraction(0)
        if len(u_part) > 1:
            raise CannotIntegrate("u-substitution left a non-monomial integrand")
        result = Sum((result, Product((_term_expr(constant_part, coeff), _integrate_power(u, r, ONE)))))
    return _replace(result, "_u", base)


@lru_cache(maxsize=1 << 10)
def antiderivative(e: Expr, var: str = "x") -> Expr:
    """
    Antiderivative from a small rule base, integration constant zero.

    Rules: linearity; x^r (r != -1); x^(-1) -> log(x); (a + b x)^r; exp(k x + c); x^m exp(k x + c) and
    x^m (a + b x)^r for small non-negative integer m, the latter by the substitution u = a + b x.

    :param e: expression
    :param var: integration variable, default is 'x'
    :return: canonical antiderivative F with dF/dvar = e
    :raises CannotIntegrate: when the integrand is outside the rule base
    """

    e = normalize(e)
    pieces = []
    for mono, coeff in _collect(e).items():
        constant_part, variable_part = _split_monomial(mono, var)
        pieces.append(Product((_term_expr(constant_part, coeff), _integrate_term(variable_part, var))))
    result = normalize(Sum(tuple(pieces)))
    if not is_zero_symbolic(Sum((differentiate(result, var), Neg(e)))):
        logger.debug("antiderivative of %s failed its round-trip check", e)
        raise CannotIntegrate(f"rule base produced an unverified antiderivative for {e}")
    return result
