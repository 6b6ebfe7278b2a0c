from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Expr:
    """
    Immutable expression tree. Build trees with the helpers at the bottom of this module and pass them through
    :func:`lienard_sym.normalize.normalize` to reach the canonical form.
    """

    def __str__(self):
        return to_text(self)

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, Neg(as_expr(other))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Neg(self)))

    def __mul__(self, other):
        return Product((self, as_expr(other)))

    def __rmul__(self, other):
        return Product((as_expr(other), self))

    def __truediv__(self, other):
        return Product((self, Power(as_expr(other), Constant(-1))))

    def __rtruediv__(self, other):
        return Product((as_expr(other), Power(self, Constant(-1))))

    def __pow__(self, other):
        return Power(self, as_expr(other))

    def __neg__(self):
        return Neg(self)


@dataclass(frozen=True)
class Constant(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class NamedConstant(Expr):
    name: str


@dataclass(frozen=True)
class Variable(Expr):
    name: str


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Log(Expr):
    arg: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


ZERO = Constant(0)
ONE = Constant(1)
MINUS_ONE = Constant(-1)

_RANK = {Constant: 0, NamedConstant: 1, Variable: 2, Log: 3, Exp: 4, Power: 5, Product: 6, Sum: 7, Neg: 8}


@lru_cache(maxsize=1 << 16)
def sort_key(e: Expr) -> tuple:
    """
    Key of the fixed total order on trees used to sort Sum and Product children.

    :param e: expression
    :return: nested tuple comparable with any other key
    """

    if isinstance(e, Constant):
        return 0, e.value
    if isinstance(e, (NamedConstant, Variable)):
        return _RANK[type(e)], e.name
    if isinstance(e, Sum):
        return 7, tuple(sort_key(t) for t in e.terms)
    if isinstance(e, Product):
        return 6, tuple(sort_key(f) for f in e.factors)
    if isinstance(e, Power):
        return 5, (sort_key(e.base), sort_key(e.exponent))
    return _RANK[type(e)], (sort_key(e.arg),)


def children(e: Expr) -> tuple:
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, Power):
        return e.base, e.exponent
    if isinstance(e, (Exp, Log, Neg)):
        return (e.arg,)
    return ()


@lru_cache(maxsize=1 << 14)
def free_symbols(e: Expr) -> frozenset:
    """
    Names of the variables (not the named constants) occurring in an expression.
    """

    if isinstance(e, Variable):
        return frozenset((e.name,))
    result = frozenset()
    for child in children(e):
        result |= free_symbols(child)
    return result


@lru_cache(maxsize=1 << 14)
def named_constants(e: Expr) -> frozenset:
    if isinstance(e, NamedConstant):
        return frozenset((e.name,))
    result = frozenset()
    for child in children(e):
        result |= named_constants(child)
    return result


def depends_on(e: Expr, names: Iterable[str]) -> bool:
    return not free_symbols(e).isdisjoint(names)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Constant(Fraction(value))
    if isinstance(value, float):
        return Constant(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


# constructors, none of them normalize

def const(value) -> Constant:
    return Constant(Fraction(value))


def var(name: str) -> Variable:
    return Variable(name)


def add(*terms) -> Expr:
    return Sum(tuple(as_expr(t) for t in terms))


def mul(*factors) -> Expr:
    return Product(tuple(as_expr(f) for f in factors))


def div(numerator, denominator) -> Expr:
    return Product((as_expr(numerator), Power(as_expr(denominator), MINUS_ONE)))


def sub(left, right) -> Expr:
    return Sum((as_expr(left), Neg(as_expr(right))))


def pow_(base, exponent) -> Expr:
    return Power(as_expr(base), as_expr(exponent))


def exp(arg) -> Expr:
    return Exp(as_expr(arg))


def log(arg) -> Expr:
    return Log(as_expr(arg))


# printer

_PREC_SUM = 1
_PREC_PRODUCT = 2
_PREC_ATOM = 4


def _fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _exponent_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    if q < 0:
        return f"-({-q.numerator}/{q.denominator})"
    return f"({q.numerator}/{q.denominator})"


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Constant):
        return e.value < 0
    if isinstance(e, Neg):
        return True
    if isinstance(e, Product):
        return _coefficient(e.factors) < 0
    return False


def _coefficient(factors) -> Fraction:
    """Product of the Constant factors, which the printer folds into one leading sign."""

    coefficient = Fraction(1)
    for factor in factors:
        if isinstance(factor, Constant):
            coefficient *= factor.value
    return coefficient


def _negated(e: Expr) -> Expr:
    if isinstance(e, Constant):
        return Constant(-e.value)
    if isinstance(e, Neg):
        return e.arg
    head = Constant(-_coefficient(e.factors))
    rest = tuple(factor for factor in e.factors if not isinstance(factor, Constant))
    if head.value == 1 and rest:
        return rest[0] if len(rest) == 1 else Product(rest)
    return Product((head,) + rest)


def _atom_text(e: Expr) -> str:
    """Text of e usable as the base of a power."""

    if isinstance(e, (Variable, NamedConstant, Exp, Log)):
        return to_text(e)
    if isinstance(e, Constant) and e.value >= 0 and e.value.denominator == 1:
        return str(e.value.numerator)
    return f"({to_text(e)})"


def _power_parts(e: Expr):
    if isinstance(e, Power) and isinstance(e.exponent, Constant):
        return e.base, e.exponent.value
    return e, None


def _factor_text(base: Expr, exponent) -> str:
    if exponent is None or exponent == 1:
        if isinstance(base, Power):
            return f"({to_text(base)})"
        return _atom_text(base) if isinstance(base, (Sum, Product, Neg, Constant)) else to_text(base)
    return f"{_atom_text(base)}^{_exponent_text(exponent)}"


def _product_text(e: Expr) -> str:
    factors = e.factors if isinstance(e, Product) else (e,)
    coefficient = Fraction(1)
    numerator, denominator = [], []
    for factor in factors:
        if isinstance(factor, Constant):
            coefficient *= factor.value
            continue
        base, exponent = _power_parts(factor)
        if exponent is not None and exponent < 0:
            denominator.append(_factor_text(base, -exponent))
        elif exponent is not None:
            numerator.append(_factor_text(base, exponent))
        else:
            numerator.append(_factor_text(factor, None))
    sign = "-" if coefficient < 0 else ""
    coefficient = abs(coefficient)
    if coefficient.numerator != 1 or not numerator:
        numerator.insert(0, str(coefficient.numerator))
    if coefficient.denominator != 1:
        denominator.insert(0, str(coefficient.denominator))
    text = sign + "*".join(numerator)
    for item in denominator:
        text += "/" + item
    return text


def to_text(e: Expr) -> str:
    """
    Print an expression in the input grammar with minimal parentheses.

    :param e: expression
    :return: text that :func:`lienard_sym.parse.parse` reads back
    """

    if isinstance(e, Constant):
        return _fraction_text(e.value)
    if isinstance(e, (Variable, NamedConstant)):
        return e.name
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = e.arg
        if isinstance(inner, (Sum, Neg)) or _is_negative(inner):
            return f"-({to_text(inner)})"
        return "-" + to_text(inner)
    if isinstance(e, Sum):
        if not e.terms:
            return "0"
        parts = [to_text(e.terms[0])]
        for term in e.terms[1:]:
            if _is_negative(term):
                text = to_text(_negated(term))
                if isinstance(_negated(term), Sum):
                    text = f"({text})"
                parts.append(f" - {text}")
            else:
                text = to_text(term)
                parts.append(f" + ({text})" if isinstance(term, Sum) else f" + {text}")
        return "".join(parts)
    if isinstance(e, Product):
        if not e.factors:
            return "1"
        return _product_text(e)
    if isinstance(e, Power):
        if isinstance(e.exponent, Constant):
            if e.exponent.value < 0:
                return _product_text(e)
            return _factor_text(e.base, e.exponent.value)
        return f"{_atom_text(e.base)}^({to_text(e.exponent)})"
    raise TypeError(f"unknown expression node {type(e).__name__}")
