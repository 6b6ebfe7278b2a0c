"""
Canonical form of expressions.

Internally an expression is collected into a sparse polynomial: a mapping from monomials to rational coefficients.
A monomial is a sorted tuple of ``(base, exponent)`` pairs with rational exponents, where a base is one of

- a Variable or NamedConstant,
- a positive integer Constant that is not a perfect power, with exponent in (0, 1),
- ``Exp(arg)`` with exponent 1, at most one per monomial,
- ``Log(arg)``,
- a primitive Sum whose exponent is not a positive integer up to ``MAX_EXPAND_DEGREE``.

Products of sums and small positive integer powers of sums are expanded, so structural equality of canonical
forms decides polynomial identities. Quotients are decided by :func:`as_numer_denom`, which brings a canonical
sum over a common denominator.

Powers are combined under the assumption that bases are positive on the domain, e.g. ``(x^2)^(1/2) = x``.
"""
import logging
import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Dict, Iterable, Optional, Tuple

from lienard_sym.expr import (ONE, ZERO, Constant, Exp, Expr, Log, NamedConstant, Neg, Power, Product, Sum, Variable,
                              depends_on, sort_key)

logger = logging.getLogger(__name__)

MAX_EXPAND_DEGREE = 12

Monomial = Tuple[Tuple[Expr, Fraction], ...]
Poly = Dict[Monomial, Fraction]

_UNIT: Poly = {(): Fraction(1)}


def _const_poly(value) -> Poly:
    value = Fraction(value)
    return {(): value} if value else {}


def _atom_poly(base: Expr, exponent=Fraction(1)) -> Poly:
    return {((base, Fraction(exponent)),): Fraction(1)}


def _add(*polys: Poly) -> Poly:
    result: Poly = {}
    for poly in polys:
        for mono, coeff in poly.items():
            total = result.get(mono, 0) + coeff
            if total:
                result[mono] = total
            else:
                result.pop(mono, None)
    return result


def _scale(poly: Poly, factor) -> Poly:
    factor = Fraction(factor)
    if not factor:
        return {}
    return {mono: coeff * factor for mono, coeff in poly.items()}


def _is_constant_poly(poly: Poly) -> bool:
    return not poly or (len(poly) == 1 and () in poly)


def _constant_value(poly: Poly) -> Fraction:
    return poly.get((), Fraction(0))


def _mono_key(mono: Monomial):
    return tuple((sort_key(base), exponent) for base, exponent in mono)


# constant powers

def _integer_root(value: int, k: int) -> Optional[int]:
    guess = int(round(value ** (1.0 / k)))
    for candidate in (guess - 1, guess, guess + 1):
        if candidate > 0 and candidate ** k == value:
            return candidate
    return None


def _perfect_power(value: int) -> Tuple[int, int]:
    """Write value = m^k with k as large as possible."""

    if value < 4 or value.bit_length() > 512:
        return value, 1
    for k in range(value.bit_length(), 1, -1):
        root = _integer_root(value, k)
        if root is not None and root > 1:
            return root, k
    return value, 1


def _int_power_poly(base: int, exponent: Fraction) -> Poly:
    if base == 1 or not exponent:
        return dict(_UNIT)
    root, k = _perfect_power(base)
    exponent = exponent * k
    whole = math.floor(exponent)
    rest = exponent - whole
    coefficient = Fraction(root) ** whole
    if rest:
        return {((Constant(root), rest),): coefficient}
    return {(): coefficient}


def _const_pow(value: Fraction, exponent: Fraction) -> Poly:
    if exponent.denominator == 1:
        if value == 0 and exponent < 0:
            return _atom_poly(ZERO, exponent)
        return _const_poly(value ** int(exponent))
    if value > 0:
        return _mul(_int_power_poly(value.numerator, exponent), _int_power_poly(value.denominator, -exponent))
    if value == 0:
        return {} if exponent > 0 else _atom_poly(ZERO, exponent)
    if exponent.denominator % 2:
        sign = -1 if exponent.numerator % 2 else 1
        return _scale(_const_pow(-value, exponent), sign)
    return _atom_poly(Constant(value), exponent)


# products

def _primitive(poly: Poly, allow_sign: bool) -> Tuple[Poly, Fraction]:
    """Split a sum into content and a primitive part with coprime integer coefficients."""

    numerators = [coeff.numerator for coeff in poly.values()]
    denominators = [coeff.denominator for coeff in poly.values()]
    content = Fraction(reduce(math.gcd, numerators), reduce(lambda a, b: a * b // math.gcd(a, b), denominators))
    content = abs(content)
    if allow_sign:
        leading = min(poly, key=lambda mono: sort_key(_term_expr(mono, Fraction(1))))
        if poly[leading] < 0:
            content = -content
    return _scale(poly, 1 / content), content


def _build_monomial(exponents: Dict[Expr, Fraction], exp_arg: Optional[Poly]) -> Poly:
    coefficient = Fraction(1)
    factors = []
    expansions = []
    for base, exponent in exponents.items():
        if not exponent:
            continue
        if isinstance(base, Constant):
            folded = _const_pow(base.value, exponent)
            if folded == {((base, exponent),): 1}:
                factors.append((base, exponent))
            elif len(folded) == 1 and () in folded:
                coefficient *= folded[()]
            else:
                expansions.append(folded)
        elif isinstance(base, Sum) and exponent.denominator == 1 and 0 < exponent <= MAX_EXPAND_DEGREE:
            expansions.append(_power_of_sum(_collect(base), int(exponent)))
        else:
            factors.append((base, exponent))
    result: Poly = {tuple(sorted(factors, key=lambda item: sort_key(item[0]))): coefficient}
    for expansion in expansions:
        result = _mul(result, expansion)
    if exp_arg:
        result = _mul(result, _exp_poly(exp_arg))
    return result


def _mul_monomials(left: Monomial, right: Monomial) -> Poly:
    if not left:
        return {right: Fraction(1)}
    if not right:
        return {left: Fraction(1)}
    exponents: Dict[Expr, Fraction] = {}
    exp_args = []
    for base, exponent in left + right:
        if isinstance(base, Exp):
            exp_args.append(_scale(_collect(base.arg), exponent))
        else:
            exponents[base] = exponents.get(base, Fraction(0)) + exponent
    if len(exp_args) <= 1 and len(exponents) + len(exp_args) == len(left) + len(right):
        # no base occurs on both sides
        return {tuple(sorted(left + right, key=lambda item: sort_key(item[0]))): Fraction(1)}
    exp_arg = _add(*exp_args) if exp_args else None
    return _build_monomial(exponents, exp_arg or None)


def _mul(left: Poly, right: Poly) -> Poly:
    if not left or not right:
        return {}
    result: Poly = {}
    for mono_l, coeff_l in left.items():
        for mono_r, coeff_r in right.items():
            product = _mul_monomials(mono_l, mono_r)
            for mono, coeff in product.items():
                total = result.get(mono, 0) + coeff * coeff_l * coeff_r
                if total:
                    result[mono] = total
                else:
                    result.pop(mono, None)
    return result


def _power_of_sum(poly: Poly, exponent: int) -> Poly:
    result = dict(_UNIT)
    square = poly
    while exponent:
        if exponent & 1:
            result = _mul(result, square)
        exponent >>= 1
        if exponent:
            square = _mul(square, square)
    return result


def _pow(poly: Poly, exponent: Fraction) -> Poly:
    exponent = Fraction(exponent)
    if not exponent:
        return dict(_UNIT)
    if exponent == 1:
        return poly
    if not poly:
        return {} if exponent > 0 else _atom_poly(ZERO, exponent)
    if len(poly) == 1:
        (mono, coeff), = poly.items()
        result = _const_pow(coeff, exponent)
        exponents: Dict[Expr, Fraction] = {}
        exp_arg = None
        for base, power in mono:
            if isinstance(base, Exp):
                exp_arg = _scale(_collect(base.arg), power * exponent)
            else:
                exponents[base] = power * exponent
        return _mul(result, _build_monomial(exponents, exp_arg))
    if exponent.denominator == 1 and 0 < exponent <= MAX_EXPAND_DEGREE:
        return _power_of_sum(poly, int(exponent))
    primitive, content = _primitive(poly, allow_sign=exponent.denominator == 1)
    return _mul(_const_pow(content, exponent), _atom_poly(_to_expr(primitive), exponent))


# exp and log

def _exp_poly(arg: Poly) -> Poly:
    result = dict(_UNIT)
    rest: Poly = {}
    for mono, coeff in arg.items():
        if len(mono) == 1 and isinstance(mono[0][0], Log) and mono[0][1] == 1:
            result = _mul(result, _pow(_collect(mono[0][0].arg), coeff))
        else:
            rest[mono] = coeff
    if rest:
        result = _mul(result, _atom_poly(Exp(_to_expr(rest))))
    return result


def _log_poly(arg: Poly) -> Poly:
    if arg == _UNIT:
        return {}
    if len(arg) == 1:
        (mono, coeff), = arg.items()
        if coeff == 1 and len(mono) == 1:
            base, exponent = mono[0]
            if isinstance(base, Exp):
                return _scale(_collect(base.arg), exponent)
            if not isinstance(base, Constant):
                return _scale(_atom_poly(Log(base)), exponent)
    return _atom_poly(Log(_to_expr(arg)))


# collection

def _collect_power(base: Expr, exponent: Fraction) -> Poly:
    if isinstance(base, Power):
        inner = _collect(base.exponent)
        if _is_constant_poly(inner):
            return _collect_power(base.base, _constant_value(inner) * exponent)
    if isinstance(base, Product):
        return reduce(_mul, (_collect_power(factor, exponent) for factor in base.factors), dict(_UNIT))
    if isinstance(base, Exp):
        return _exp_poly(_scale(_collect(base.arg), exponent))
    return _pow(_collect(base), exponent)


@lru_cache(maxsize=1 << 14)
def _collect(e: Expr) -> Poly:
    if isinstance(e, Constant):
        return _const_poly(e.value)
    if isinstance(e, (Variable, NamedConstant)):
        return _atom_poly(e)
    if isinstance(e, Sum):
        return _add(*(_collect(term) for term in e.terms))
    if isinstance(e, Product):
        result = dict(_UNIT)
        for factor in e.factors:
            result = _mul(result, _collect(factor))
            if not result:
                break
        return result
    if isinstance(e, Neg):
        return _scale(_collect(e.arg), -1)
    if isinstance(e, Power):
        exponent = _collect(e.exponent)
        if _is_constant_poly(exponent):
            return _collect_power(e.base, _constant_value(exponent))
        return _collect(Exp(Product((e.exponent, Log(e.base)))))
    if isinstance(e, Exp):
        return _exp_poly(_collect(e.arg))
    if isinstance(e, Log):
        return _log_poly(_collect(e.arg))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _term_expr(mono: Monomial, coeff: Fraction) -> Expr:
    factors = [base if exponent == 1 else Power(base, Constant(exponent)) for base, exponent in mono]
    factors.sort(key=sort_key)
    if coeff != 1 or not factors:
        factors.insert(0, Constant(coeff))
    return factors[0] if len(factors) == 1 else Product(tuple(factors))


def _to_expr(poly: Poly) -> Expr:
    terms = sorted((_term_expr(mono, coeff) for mono, coeff in poly.items()), key=sort_key)
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


@lru_cache(maxsize=1 << 14)
def normalize(e: Expr) -> Expr:
    """
    Canonical form of an expression. Structural equality of canonical forms is symbolic equality.

    :param e: any expression
    :return: the canonical form
    """

    return _to_expr(_collect(e))


# quotients

def _split_term(mono: Monomial):
    """Separate the negative integer powers of sums from the rest of a monomial."""

    rest, denominators = [], []
    for base, exponent in mono:
        if isinstance(base, Sum) and exponent < 0 and exponent.denominator == 1:
            denominators.append((base, int(-exponent)))
        else:
            rest.append((base, exponent))
    return tuple(rest), denominators


@lru_cache(maxsize=1 << 12)
def _fraction_of(e: Expr) -> Tuple[Expr, Expr]:
    numerator, denominator = _fraction(_collect(e))
    return _to_expr(numerator), _to_expr(denominator)


def _fraction(poly: Poly) -> Tuple[Poly, Poly]:
    terms = []
    largest: Dict[Expr, int] = {}
    for mono, coeff in poly.items():
        rest, denominators = _split_term(mono)
        numerator = {rest: coeff}
        term_denominators: Dict[Expr, int] = {}
        for base, power in denominators:
            base_num, base_den = _fraction_of(base)
            numerator = _mul(numerator, _pow(_collect(base_den), Fraction(power)))
            term_denominators[base_num] = term_denominators.get(base_num, 0) + power
        for key, power in term_denominators.items():
            largest[key] = max(largest.get(key, 0), power)
        terms.append((numerator, term_denominators))
    if not largest:
        return poly, dict(_UNIT)
    numerator: Poly = {}
    for term_numerator, term_denominators in terms:
        for key, power in largest.items():
            missing = power - term_denominators.get(key, 0)
            if missing:
                term_numerator = _mul(term_numerator, _pow(_collect(key), Fraction(missing)))
        numerator = _add(numerator, term_numerator)
    denominator = dict(_UNIT)
    for key, power in largest.items():
        denominator = _mul(denominator, _pow(_collect(key), Fraction(power)))
    return numerator, denominator


def as_numer_denom(e: Expr) -> Tuple[Expr, Expr]:
    """
    Write an expression as one quotient N/D where neither part holds a negative power of a sum.

    :param e: any expression
    :return: canonical numerator and denominator
    """

    return _fraction_of(normalize(e))


def _clear_fractional_powers(poly: Poly) -> Poly:
    """Multiply by the power of each sum that brings its lowest fractional exponent to zero."""

    fractional = {base for mono in poly for base, exponent in mono
                  if isinstance(base, Sum) and exponent.denominator != 1}
    for base in sorted(fractional, key=sort_key):
        lowest = min(dict(mono).get(base, Fraction(0)) for mono in poly)
        if lowest:
            poly = _mul(poly, _atom_poly(base, -lowest))
    return poly


def is_zero_symbolic(e: Expr) -> bool:
    """
    Decide e ≡ 0 symbolically: the canonical form is zero, or the numerator over a common denominator is, after
    clearing fractional powers of sums, e.g. (x+1)^(3/2) - x*(x+1)^(1/2) - (x+1)^(1/2).
    """

    poly = _collect(e)
    if not poly:
        return True
    numerator, _ = _fraction(_clear_fractional_powers(poly))
    return not numerator


def _variable_part(mono: Monomial, names: frozenset) -> Monomial:
    return tuple((base, exponent) for base, exponent in mono if depends_on(base, names))


def symbolic_ratio(e: Expr, names: Iterable[str]) -> Optional[Expr]:
    """
    Find k free of the given variables with e ≡ k, by matching the leading terms of numerator and denominator.

    :param e: any expression
    :param names: variable names k must not depend on
    :return: canonical k, or None when no such constant was found
    """

    names = frozenset(names)
    poly = _collect(e)
    if not poly:
        return ZERO
    numerator, denominator = _fraction(poly)
    if not numerator:
        return ZERO
    leading = min(denominator, key=lambda mono: _mono_key(_variable_part(mono, names)))
    target = _variable_part(leading, names)

    def matching(poly: Poly) -> Poly:
        return {mono: coeff for mono, coeff in poly.items() if _variable_part(mono, names) == target}

    top, bottom = matching(numerator), matching(denominator)
    if not top:
        return None
    ratio = normalize(Product((_to_expr(top), Power(_to_expr(bottom), Constant(-1)))))
    if depends_on(ratio, names):
        return None
    residue = Sum((_to_expr(numerator), Neg(Product((ratio, _to_expr(denominator))))))
    if not is_zero_symbolic(residue):
        return None
    return ratio


def constant_value(e: Expr) -> Optional[Fraction]:
    """The rational value of a canonical constant, or None."""

    e = normalize(e)
    return e.value if isinstance(e, Constant) else None


def is_one(e: Expr) -> bool:
    return normalize(e) == ONE


def is_single_term(e: Expr) -> bool:
    """
    Whether the numerator over a common denominator is one nonzero monomial. Such an expression is not
    identically zero: no atom of a canonical form vanishes identically.
    """

    poly = _collect(e)
    if not poly:
        return False
    numerator, _ = _fraction(poly)
    return len(numerator) == 1
