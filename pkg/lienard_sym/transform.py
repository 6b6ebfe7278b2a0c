import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, Optional

from lienard_sym.calculus import antiderivative, differentiate, substitute
from lienard_sym.errors import CannotIntegrate, DegenerateForce, PullbackUnavailable, UnknownSymbol
from lienard_sym.evaluate import DEFAULT_DOMAIN, Decision, Interval, compile_expr, is_identically_zero
from lienard_sym.expr import MINUS_ONE, Constant, Exp, Expr, Power, Product, Sum, Variable, free_symbols
from lienard_sym.normalize import normalize
from lienard_sym.oracle import QuadratureM, quadrature_M, quadrature_phi
from lienard_sym.parse import parse

logger = logging.getLogger(__name__)

# formal symbol standing in for the integrating factor when exp(∫f) has no closed form
M_SYMBOL = "M"


@dataclass(frozen=True)
class LienardInput:
    """
    The equation x'' + f(x) x'^2 + g(x) = 0 on a domain of x.
    """

    f: Expr
    g: Expr
    domain: Interval = DEFAULT_DOMAIN
    var: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "f", normalize(self.f))
        object.__setattr__(self, "g", normalize(self.g))
        for e in (self.f, self.g):
            stray = free_symbols(e) - {self.var}
            if stray:
                raise UnknownSymbol(sorted(stray)[0])

    @classmethod
    def from_text(cls, f_text: str, g_text: str, domain: Optional[Interval] = None, var: str = "x",
                  constants: Iterable[str] = ()) -> "LienardInput":
        """
        Parse f and g over a single variable.

        :raises ExprSyntaxError: malformed text
        :raises UnknownSymbol: an identifier other than the variable and the declared constants
        """

        constants = tuple(constants)
        return cls(parse(f_text, var, constants), parse(g_text, var, constants), domain or DEFAULT_DOMAIN, var)


@dataclass(frozen=True)
class TransformData:
    """
    Integrating factor M = exp(∫f), transformation y = Φ(x) = ∫M and pulled-back force G = M·g.

    In numeric-only mode ``M`` is the formal symbol ``M`` with dM/dx = f·M and ``M_eval`` evaluates it by
    quadrature. ``phi`` is None when Φ has no closed form; ``phi_quadrature`` then evaluates Φ.
    """

    f: Expr
    g: Expr
    M: Expr
    phi: Optional[Expr]
    G: Expr
    domain: Interval = DEFAULT_DOMAIN
    var: str = "x"
    numeric_only: bool = False
    M_eval: Optional[QuadratureM] = field(default=None, compare=False, repr=False)
    phi_quadrature: Optional[Callable[[float], float]] = field(default=None, compare=False, repr=False)

    @property
    def extra(self) -> Optional[Dict[str, Callable[[float], float]]]:
        """Bindings of formal symbols as functions of x, for sampling."""

        return {M_SYMBOL: self.M_eval} if self.numeric_only else None

    @property
    def symbols(self) -> tuple:
        return (self.var, M_SYMBOL) if self.numeric_only else (self.var,)

    def bindings(self, x: float) -> Dict[str, float]:
        values = {self.var: x}
        if self.numeric_only:
            values[M_SYMBOL] = self.M_eval(x)
        return values

    def M_value(self, x: float) -> float:
        if self.numeric_only:
            return self.M_eval(x)
        return compile_expr(self.M)({self.var: x})

    def phi_value(self, x: float) -> float:
        if self.phi is not None:
            return compile_expr(self.phi)({self.var: x})
        return self.phi_quadrature(x)

    def f_value(self, x: float) -> float:
        return compile_expr(self.f)({self.var: x})

    def g_value(self, x: float) -> float:
        return compile_expr(self.g)({self.var: x})

    def G_value(self, x: float) -> float:
        return compile_expr(self.G)(self.bindings(x))

    @cached_property
    def _derivatives(self) -> list:
        return [self.G]

    def force_derivative(self, order: int) -> Expr:
        """
        d^order F / dy^order along y = Φ(x), as an expression in x (and M in numeric-only mode).
        """

        cache = self._derivatives
        while len(cache) <= order:
            cache.append(d_dy(cache[-1], self))
        return cache[order]

    def summary(self) -> Dict[str, object]:
        return {
            "M": "numeric" if self.numeric_only else str(self.M),
            "phi": str(self.phi) if self.phi is not None else "numeric",
            "G": "numeric" if self.numeric_only else str(self.G),
            "domain": [self.domain.lo, self.domain.hi],
            "numeric_only": self.numeric_only,
        }


def integrating_factor(f: Expr, domain: Interval = DEFAULT_DOMAIN, var: str = "x") -> Optional[Expr]:
    """
    Integrating factor M = exp(∫f dx), integration constant zero.

    :param f: damping coefficient
    :param domain: domain of x
    :param var: variable name
    :return: M, or None when ∫f is outside the rule base and M must come from quadrature
    """

    try:
        return normalize(Exp(antiderivative(normalize(f), var)))
    except CannotIntegrate:
        logger.debug("no closed form for the integral of %s on %s", f, domain)
        return None


def phi(f: Expr, domain: Interval = DEFAULT_DOMAIN, var: str = "x") -> Optional[Expr]:
    """
    Transformation y = Φ(x) = ∫M dx.

    :return: Φ, or None when M or its integral has no closed form
    """

    M = integrating_factor(f, domain, var)
    if M is None:
        return None
    try:
        return antiderivative(M, var)
    except CannotIntegrate:
        logger.debug("no closed form for the integral of M = %s", M)
        return None


def pullback_force(input: LienardInput) -> Expr:
    """
    G = M·g, the canonical force F expressed along y = Φ(x).

    Without a closed-form M the result carries the formal symbol ``M``.
    """

    M = integrating_factor(input.f, input.domain, input.var)
    if M is None:
        M = Variable(M_SYMBOL)
    return normalize(Product((M, input.g)))


def total_dx(e: Expr, data: TransformData) -> Expr:
    """
    Total derivative d/dx, treating the formal M through dM/dx = f·M.
    """

    derivative = differentiate(e, data.var)
    if data.numeric_only:
        through_M = Product((data.f, Variable(M_SYMBOL), differentiate(e, M_SYMBOL)))
        derivative = normalize(Sum((derivative, through_M)))
    return derivative


def d_dy(e: Expr, data: TransformData) -> Expr:
    """
    Derivative with respect to y = Φ(x) of an expression in x: (1/M) d/dx.

    :param e: expression H(Φ(x))
    :param data: transformation
    :return: H'(Φ(x)) as an expression in x
    """

    return normalize(Product((total_dx(e, data), Power(data.M, MINUS_ONE))))


def invariant_K(data: TransformData, *, samples: int = 64, tol: float = 1e-9,
                zero_test: Optional[Callable[[str, Expr], Decision]] = None) -> Expr:
    """
    K = F·F''/F'^2 along y = Φ(x). K is 1 for exponential forces and (n-1)/n for F = (α+βy)^n.

    :param zero_test: ``(name, e) -> Decision`` used for the degeneracy tests, e.g. one that records them
    :raises DegenerateForce: G or F' vanishes identically
    """

    if zero_test is None:
        def zero_test(name, e):
            return is_identically_zero(e, data.var, data.domain, extra=data.extra, samples=samples, tol=tol)

    G, F1, F2 = (data.force_derivative(k) for k in range(3))
    for name, e in (("F", G), ("F'", F1)):
        if zero_test(f"{name} ≡ 0 (K)", e).yes:
            raise DegenerateForce(f"{name} vanishes identically")
    return normalize(Product((G, F2, Power(F1, Constant(-2)))))


def transform(input: LienardInput, *, numeric_only: bool = False) -> TransformData:
    """
    Compute M, Φ and G for an equation.

    :param input: the equation
    :param numeric_only: skip the symbolic integration and carry M as a formal symbol
    :return: the transformation data
    """

    M = None if numeric_only else integrating_factor(input.f, input.domain, input.var)
    if M is None:
        if not numeric_only:
            logger.warning("integral of f = %s has no closed form, switching to numeric-only mode", input.f)
        M_eval = quadrature_M(input.f, input.domain, input.var)
        G = normalize(Product((Variable(M_SYMBOL), input.g)))
        return TransformData(input.f, input.g, Variable(M_SYMBOL), None, G, input.domain, input.var,
                             numeric_only=True, M_eval=M_eval, phi_quadrature=M_eval.phi)
    try:
        phi_expr = antiderivative(M, input.var)
        phi_quadrature = None
    except CannotIntegrate:
        logger.debug("no closed form for Φ = ∫%s", M)
        phi_expr = None
        phi_quadrature = quadrature_phi(compile_value(M, input.var), input.domain)
    G = normalize(Product((M, input.g)))
    logger.debug("M = %s, Φ = %s, G = %s", M, phi_expr, G)
    return TransformData(input.f, input.g, M, phi_expr, G, input.domain, input.var, phi_quadrature=phi_quadrature)


def compile_value(e: Expr, var: str = "x") -> Callable[[float], float]:
    fn = compile_expr(e)
    return lambda x: fn({var: x})


def lienard_from_canonical(F: Expr, f: Expr, var: str = "x", canonical_var: str = "y",
                           domain: Interval = DEFAULT_DOMAIN) -> Expr:
    """
    Build g = F(Φ(x))/M(x), so that x'' + f x'^2 + g = 0 maps to y'' + F(y) = 0.

    :param F: canonical force in ``canonical_var``
    :param f: damping coefficient in ``var``
    :param domain: domain of x
    :return: g
    :raises PullbackUnavailable: M or Φ has no closed form
    """

    M = integrating_factor(f, domain, var)
    phi_expr = phi(f, domain, var)
    if M is None or phi_expr is None:
        raise PullbackUnavailable(f"no closed-form transformation for f = {f}")
    return normalize(Product((substitute(F, canonical_var, phi_expr), Power(M, MINUS_ONE))))
