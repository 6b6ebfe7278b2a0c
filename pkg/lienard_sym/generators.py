import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache, singledispatch
from typing import Callable, Dict, List, Optional, Tuple

from lienard_sym.calculus import differentiate, substitute
from lienard_sym.cases import (CaseTag, ErmakovPinney, Exponential, Generic, InverseCube, Linear, Param, PowerLaw,
                               param_float)
from lienard_sym.errors import PullbackUnavailable
from lienard_sym.evaluate import compile_expr
from lienard_sym.expr import ONE, ZERO, Constant, Exp, Expr, Neg, Power, Product, Sum, Variable
from lienard_sym.normalize import normalize
from lienard_sym.oracle import JET_KEYS, ResidualReport, symmetry_residual

logger = logging.getLogger(__name__)

T = Variable("t")
Y = Variable("y")

Jet = Dict[str, float]
# values of r, r', r'', r''' at t
TimeFunction = Callable[[float], Tuple[float, float, float, float]]


@dataclass(frozen=True)
class SymmetryGenerator:
    """
    Vector field tau(t, y) ∂t + eta(t, y) ∂y.

    Fields whose time dependence lies outside the expression grammar are opaque: ``tau`` and ``eta`` are None,
    ``description`` names them and ``jet_fn`` evaluates their partial derivatives.
    """

    label: str
    tau: Optional[Expr]
    eta: Optional[Expr]
    description: str = ""
    jet_fn: Optional[Callable[[float, float], Jet]] = field(default=None, compare=False, repr=False)
    tau_x: Optional[Expr] = None
    eta_x: Optional[Expr] = None
    residual: Optional[ResidualReport] = field(default=None, compare=False)

    @property
    def printable(self) -> bool:
        return self.tau is not None and self.eta is not None

    @property
    def certified(self) -> bool:
        return self.residual is not None and self.residual.passed

    def jet(self, t: float, y: float) -> Jet:
        """Partial derivatives of tau and eta up to second order, keyed as ``JET_KEYS``."""

        if self.jet_fn is not None:
            return self.jet_fn(t, y)
        bindings = {"t": t, "y": y}
        return {key: fn(bindings) for key, fn in _symbolic_jet(self.tau, self.eta).items()}

    def __str__(self):
        if not self.printable:
            return self.description
        return f"({self.tau})*d/dt + ({self.eta})*d/dy"

    def text_x(self, var: str = "x") -> Optional[str]:
        if self.tau_x is None or self.eta_x is None:
            return None
        return f"({self.tau_x})*d/dt + ({self.eta_x})*d/d{var}"


@lru_cache(maxsize=256)
def _symbolic_jet(tau: Expr, eta: Expr) -> Dict[str, Callable]:
    def d(e, *names):
        for name in names:
            e = differentiate(e, name)
        return e

    parts = {}
    for prefix, e in (("tau", tau), ("eta", eta)):
        parts[prefix] = e
        parts[f"{prefix}_t"] = d(e, "t")
        parts[f"{prefix}_y"] = d(e, "y")
        parts[f"{prefix}_tt"] = d(e, "t", "t")
        parts[f"{prefix}_ty"] = d(e, "t", "y")
        parts[f"{prefix}_yy"] = d(e, "y", "y")
    return {key: compile_expr(parts[key]) for key in JET_KEYS}


def symbolic_generator(label: str, tau: Expr, eta: Expr) -> SymmetryGenerator:
    return SymmetryGenerator(label, normalize(tau), normalize(eta))


TIME_TRANSLATION = SymmetryGenerator("X1", ONE, ZERO)


def param_expr(value: Param) -> Expr:
    if isinstance(value, Expr):
        return normalize(value)
    return Constant(Fraction(value))


def _sqrt(value: Param) -> Expr:
    """Square root of a positive parameter, exact when the parameter is."""

    if isinstance(value, float):
        return Constant(Fraction(math.sqrt(value)))
    return normalize(Power(param_expr(value), Constant(Fraction(1, 2))))


def harmonic(k: float, sine: bool) -> TimeFunction:
    """cos(k t) or sin(k t) with its first three derivatives."""

    def values(t):
        c, s = math.cos(k * t), math.sin(k * t)
        if sine:
            return s, k * c, -k * k * s, -k ** 3 * c
        return c, -k * s, -k * k * c, k ** 3 * s

    return values


def _sl2_jet(rho: TimeFunction, c: float) -> Callable[[float, float], Jet]:
    # tau = r(t), eta = r'(t) (y + c) / 2
    def jet(t, y):
        r, r1, r2, r3 = rho(t)
        u = y + c
        return {"tau": r, "tau_t": r1, "tau_y": 0.0, "tau_tt": r2, "tau_ty": 0.0, "tau_yy": 0.0,
                "eta": r1 * u / 2, "eta_t": r2 * u / 2, "eta_y": r1 / 2, "eta_tt": r3 * u / 2, "eta_ty": r2 / 2,
                "eta_yy": 0.0}

    return jet


def _translation_jet(phi: TimeFunction) -> Callable[[float, float], Jet]:
    # tau = 0, eta = phi(t)
    def jet(t, y):
        p, p1, p2, _ = phi(t)
        return {"tau": 0.0, "tau_t": 0.0, "tau_y": 0.0, "tau_tt": 0.0, "tau_ty": 0.0, "tau_yy": 0.0,
                "eta": p, "eta_t": p1, "eta_y": 0.0, "eta_tt": p2, "eta_ty": 0.0, "eta_yy": 0.0}

    return jet


def _sl2_rational(c: Param) -> List[SymmetryGenerator]:
    u = Sum((Y, param_expr(c)))
    return [TIME_TRANSLATION,
            symbolic_generator("X2", Product((Constant(2), T)), u),
            symbolic_generator("X3", Power(T, Constant(2)), Product((T, u)))]


@singledispatch
def generators_for(case: CaseTag) -> List[SymmetryGenerator]:
    """
    Point symmetries of y'' + F(y) = 0 for a classified force, in (t, y).

    The list always starts with ∂t. For the linear case it holds ∂t and two solution translations; the remaining
    generators of sl(3,R) are not emitted.

    :param case: classified case with its parameters
    :return: generators
    """

    raise TypeError(f"no generators for {type(case).__name__}")


@generators_for.register
def _(case: Generic) -> List[SymmetryGenerator]:
    return [TIME_TRANSLATION]


@generators_for.register
def _(case: PowerLaw) -> List[SymmetryGenerator]:
    n = param_expr(case.n)
    weight = Product((Constant(2), Power(Sum((ONE, Neg(n))), Constant(-1))))
    return [TIME_TRANSLATION, symbolic_generator("X2", T, Product((weight, Sum((Y, param_expr(case.shift))))))]


@generators_for.register
def _(case: Exponential) -> List[SymmetryGenerator]:
    return [TIME_TRANSLATION,
            symbolic_generator("X2", T, Product((Constant(-2), Power(param_expr(case.gamma), Constant(-1)))))]


@generators_for.register
def _(case: InverseCube) -> List[SymmetryGenerator]:
    return _sl2_rational(case.c)


@generators_for.register
def _(case: ErmakovPinney) -> List[SymmetryGenerator]:
    alpha = param_float(case.alpha)
    if alpha == 0:
        return _sl2_rational(case.c)
    u = Sum((Y, param_expr(case.c)))
    if alpha < 0:
        # r''' + 4 alpha r' = 0 with r = exp(±2 omega t)
        omega = _sqrt(-case.alpha if not isinstance(case.alpha, Expr) else Neg(case.alpha))
        generators = [TIME_TRANSLATION]
        for label, sign in (("X2", 1), ("X3", -1)):
            rate = Product((Constant(2 * sign), omega))
            rho = Exp(Product((rate, T)))
            generators.append(symbolic_generator(label, rho, Product((Constant(Fraction(sign)), omega, rho, u))))
        return generators
    k = 2 * math.sqrt(alpha)
    c = param_float(case.c)
    return [TIME_TRANSLATION,
            SymmetryGenerator("X2", None, None, f"cos({k:.12g}*t)*d/dt - {k / 2:.12g}*sin({k:.12g}*t)*(y + {c:.12g})*d/dy",
                              _sl2_jet(harmonic(k, sine=False), c)),
            SymmetryGenerator("X3", None, None, f"sin({k:.12g}*t)*d/dt + {k / 2:.12g}*cos({k:.12g}*t)*(y + {c:.12g})*d/dy",
                              _sl2_jet(harmonic(k, sine=True), c))]


@generators_for.register
def _(case: Linear) -> List[SymmetryGenerator]:
    a = param_float(case.a)
    if a is None:
        return [TIME_TRANSLATION]
    if a == 0:
        return [TIME_TRANSLATION, symbolic_generator("X2", ZERO, ONE), symbolic_generator("X3", ZERO, T)]
    if a < 0:
        omega = _sqrt(-case.a if not isinstance(case.a, Expr) else Neg(case.a))
        return [TIME_TRANSLATION,
                symbolic_generator("X2", ZERO, Exp(Product((omega, T)))),
                symbolic_generator("X3", ZERO, Exp(Product((Constant(-1), omega, T))))]
    k = math.sqrt(a)
    return [TIME_TRANSLATION,
            SymmetryGenerator("X2", None, None, f"cos({k:.12g}*t)*d/dy", _translation_jet(harmonic(k, sine=False))),
            SymmetryGenerator("X3", None, None, f"sin({k:.12g}*t)*d/dy", _translation_jet(harmonic(k, sine=True)))]


def pullback_generator(generator: SymmetryGenerator, data) -> SymmetryGenerator:
    """
    Rewrite a generator in (t, x) through y = Φ(x), ∂y = M(x)^(-1) ∂x.

    :param generator: generator in (t, y)
    :param data: transformation
    :return: the same generator with ``tau_x`` and ``eta_x`` set
    :raises PullbackUnavailable: Φ has no closed form or the generator is opaque
    """

    if data.phi is None or data.numeric_only:
        raise PullbackUnavailable("Φ has no closed form")
    if not generator.printable:
        raise PullbackUnavailable(f"generator {generator.label} is opaque")
    tau_x = substitute(generator.tau, "y", data.phi)
    eta_x = normalize(Product((substitute(generator.eta, "y", data.phi), Power(data.M, Constant(-1)))))
    return replace(generator, tau_x=tau_x, eta_x=eta_x)


def certify(generators: List[SymmetryGenerator], data, samples: int = 100, tol: float = 1e-8) -> List[SymmetryGenerator]:
    """
    Attach a symmetry residual report to every generator.
    """

    certified = []
    for generator in generators:
        report = symmetry_residual(generator, data, samples, tol)
        if not report.passed:
            logger.warning("generator %s failed certification: residual %.3g", generator.label, report.max_abs)
        certified.append(replace(generator, residual=report))
    return certified
