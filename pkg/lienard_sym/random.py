import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from lienard_sym.cases import (CaseTag, ErmakovPinney, Exponential, InverseCube, Linear, LinearSubcase, PowerLaw)
from lienard_sym.evaluate import DEFAULT_DOMAIN, Interval, compile_expr
from lienard_sym.expr import Constant, Exp, Expr, Log, Neg, Power, Product, Sum, Variable
from lienard_sym.normalize import normalize
from lienard_sym.transform import lienard_from_canonical, phi

Y = Variable("y")

POWER_EXPONENTS = (-4, -2, -1, 2, 3, 4, 5)
DAMPING_KINDS = ("zero", "constant", "c/x", "1/x")
FORCE_KINDS = ("power", "exponential", "inverse_cube", "ermakov_pinney", "linear")
# poles of F and zeros of a power base stay this far from the sampled y-range
SINGULAR_MARGIN = 0.5


def random_rational(rng: random.Random, positive: bool = False, bound: int = 9) -> Fraction:
    """Rational with numerator and denominator bounded by ``bound`` in absolute value, never zero."""

    value = Fraction(rng.randint(1, bound), rng.randint(1, bound))
    if not positive and rng.random() < 0.5:
        value = -value
    return value


def _positive_expr(rng: random.Random, depth: int, var: Variable) -> Expr:
    # positive on x > 0, used under log and fractional powers
    if depth <= 0 or rng.random() < 0.3:
        return var if rng.random() < 0.6 else Constant(random_rational(rng, positive=True, bound=5))
    kind = rng.choice(("sum", "product", "exp"))
    if kind == "sum":
        return Sum((_positive_expr(rng, depth - 1, var), _positive_expr(rng, depth - 1, var)))
    if kind == "product":
        return Product((_positive_expr(rng, depth - 1, var), _positive_expr(rng, depth - 1, var)))
    return Exp(Product((Constant(random_rational(rng, bound=3)), var)))


def random_expr(rng: random.Random, depth: int = 3, var: str = "x") -> Expr:
    """
    A grammar tree in one variable, real on x > 0 except where a denominator vanishes.

    :param rng: random source
    :param depth: maximum nesting
    :param var: variable name
    :return: an expression, not normalized
    """

    x = Variable(var)
    if depth <= 0 or rng.random() < 0.2:
        return x if rng.random() < 0.6 else Constant(random_rational(rng, bound=5))
    kind = rng.choice(("sum", "sum", "product", "product", "power", "exp", "log", "neg"))
    if kind == "sum":
        return Sum(tuple(random_expr(rng, depth - 1, var) for _ in range(rng.randint(2, 3))))
    if kind == "product":
        return Product(tuple(random_expr(rng, depth - 1, var) for _ in range(2)))
    if kind == "power":
        if rng.random() < 0.5:
            return Power(random_expr(rng, depth - 1, var), Constant(rng.choice((-2, -1, 2, 3))))
        return Power(_positive_expr(rng, depth - 1, x), Constant(Fraction(rng.choice((-3, -1, 1, 3)), 2)))
    if kind == "exp":
        return Exp(Product((Constant(random_rational(rng, bound=3)), _positive_expr(rng, 1, x))))
    if kind == "log":
        return Log(_positive_expr(rng, depth - 1, x))
    return Neg(random_expr(rng, depth - 1, var))


def gen_random_exprs(seed: Optional[int], N: int, depth: int = 3, var: str = "x") -> List[Expr]:
    """
    Generate random expression trees

    :param seed: random seed
    :param N: number of expressions
    :param depth: maximum nesting
    :param var: variable name
    :return: list of expressions
    """

    rng = random.Random(seed)
    return [random_expr(rng, depth, var) for _ in range(N)]


def _damping_constant(rng: random.Random) -> Fraction:
    # at most 2, so that exp(gamma*Φ) stays finite on the default domain
    c = random_rational(rng, positive=True)
    return c if c <= 2 else 1 / c


def random_damping(rng: random.Random, kind: Optional[str] = None, var: str = "x") -> Expr:
    """A damping coefficient with closed-form M and Φ: 0, c, c/x or 1/x with c > 0."""

    kind = kind or rng.choice(DAMPING_KINDS)
    x = Variable(var)
    if kind == "zero":
        return Constant(0)
    if kind == "constant":
        return Constant(_damping_constant(rng))
    if kind == "c/x":
        return normalize(Product((Constant(_damping_constant(rng)), Power(x, Constant(-1)))))
    if kind == "1/x":
        return Power(x, Constant(-1))
    raise ValueError(f"unknown damping kind {kind!r}")


def phi_image(f: Expr, domain: Interval = DEFAULT_DOMAIN, var: str = "x") -> Optional[Tuple[float, float]]:
    """Φ(domain) for a damping with a closed-form Φ, else None."""

    Phi = phi(f, domain, var)
    if Phi is None:
        return None
    fn = compile_expr(Phi)
    ends = fn({var: domain.lo}), fn({var: domain.hi})
    return min(ends), max(ends)


def _clear_of(point: Fraction, image: Optional[Tuple[float, float]]) -> bool:
    return image is None or not image[0] - SINGULAR_MARGIN <= point <= image[1] + SINGULAR_MARGIN


def _shift(rng: random.Random, image: Optional[Tuple[float, float]]) -> Fraction:
    # y = -c is singular for F
    while True:
        c = random_rational(rng)
        if _clear_of(-c, image):
            return c


def random_force(rng: random.Random, kind: Optional[str] = None,
                 image: Optional[Tuple[float, float]] = None) -> Tuple[Expr, CaseTag]:
    """
    A canonical force F(y) from the classification catalogue with signed parameters, and the case it must be
    classified as.

    :param rng: random source
    :param kind: one of ``FORCE_KINDS``, random when None
    :param image: y-range the equation is sampled on; parameters putting a pole or a zero of the power base
        within ``SINGULAR_MARGIN`` of it are drawn again
    :return: (F, expected case)
    """

    kind = kind or rng.choice(FORCE_KINDS)
    if kind == "power":
        n = Fraction(rng.choice(POWER_EXPONENTS))
        while True:
            alpha, beta = random_rational(rng), random_rational(rng)
            if _clear_of(-alpha / beta, image):
                break
        F = Power(Sum((Constant(alpha), Product((Constant(beta), Y)))), Constant(n))
        # the real root of the amplitude is positive for even n
        sign = -1 if beta < 0 and n.numerator % 2 == 0 else 1
        return F, PowerLaw(n, sign * alpha, sign * beta, alpha / beta, beta ** n)
    if kind == "exponential":
        gamma = random_rational(rng, bound=3)
        return Exp(Product((Constant(gamma), Y))), Exponential(gamma)
    if kind == "inverse_cube":
        c, strength = _shift(rng, image), random_rational(rng)
        return Product((Constant(strength), Power(Sum((Y, Constant(c))), Constant(-3)))), InverseCube(c, strength)
    if kind == "ermakov_pinney":
        alpha, beta, c = random_rational(rng), random_rational(rng), _shift(rng, image)
        u = Sum((Y, Constant(c)))
        F = Sum((Product((Constant(alpha), u)), Product((Constant(beta), Power(u, Constant(-3))))))
        return F, ErmakovPinney(alpha, beta, c)
    if kind == "linear":
        a = random_rational(rng)
        b = random_rational(rng) if rng.random() < 0.5 else Fraction(0)
        subcase = LinearSubcase.AFFINE if b else LinearSubcase.HOMOGENEOUS
        return Sum((Product((Constant(a), Y)), Constant(b))), Linear(subcase, a, b)
    raise ValueError(f"unknown force kind {kind!r}")


@dataclass(frozen=True)
class RoundTripInstance:
    """An equation built from a known canonical force, with g = F(Φ(x))/M(x)."""

    F: Expr
    f: Expr
    g: Expr
    expected: CaseTag


def random_instance(rng: random.Random, force_kind: Optional[str] = None,
                    damping_kind: Optional[str] = None) -> RoundTripInstance:
    f = random_damping(rng, damping_kind)
    F, expected = random_force(rng, force_kind, phi_image(f))
    return RoundTripInstance(normalize(F), f, lienard_from_canonical(F, f), expected)


def gen_random_instances(seed: Optional[int], N: int) -> List[RoundTripInstance]:
    """
    Generate random equations with a known classification

    :param seed: random seed
    :param N: number of instances
    :return: list of instances
    """

    rng = random.Random(seed)
    return [random_instance(rng) for _ in range(N)]
