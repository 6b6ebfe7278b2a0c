import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, singledispatch
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from lienard_sym.calculus import differentiate
from lienard_sym.errors import DomainError, UnboundSymbol
from lienard_sym.expr import (Constant, Exp, Expr, Log, NamedConstant, Neg, Power, Product, Sum, Variable, children,
                              depends_on, free_symbols, named_constants)
from lienard_sym.normalize import is_single_term, is_zero_symbolic, normalize, symbolic_ratio

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 64
DEFAULT_TOLERANCE = 1e-9
DENOMINATOR_FLOOR = 1e-6
# named constants are sampled in this box when a decision falls back to numbers
PARAMETER_BOX = (1.0, 2.0)
# sample points closer than this to a pole are dropped
GUARD_BAND = 0.1


class TriState(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class Grade(enum.Enum):
    SYMBOLIC = "symbolic"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class Decision:
    """
    Outcome of a zero or constancy test.

    :param state: Yes, No or Unknown
    :param grade: whether the outcome was reached symbolically or by sampling
    :param value: the constant for a Yes of :func:`is_constant`, an Expr when symbolic, else a float
    """

    state: TriState
    grade: Grade
    value: Union[Expr, float, None] = None

    @property
    def yes(self) -> bool:
        return self.state is TriState.YES

    @property
    def no(self) -> bool:
        return self.state is TriState.NO

    @property
    def unknown(self) -> bool:
        return self.state is TriState.UNKNOWN


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}], need finite lo < hi")

    @classmethod
    def from_text(cls, text: str) -> "Interval":
        """
        Read ``lo:hi``, optionally wrapped in brackets, e.g. ``1:2``, ``(0:1]``.
        """

        text = text.strip()
        lo_closed = not text.startswith("(")
        hi_closed = not text.endswith(")")
        body = text.lstrip("[(").rstrip("])")
        parts = body.split(":")
        if len(parts) != 2:
            raise ValueError(f"expected lo:hi, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), lo_closed, hi_closed)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo:g}, {self.hi:g}{']' if self.hi_closed else ')'}"


DEFAULT_DOMAIN = Interval(1.0, 2.0)


# evaluation

class _Meter:
    """Collects the largest subterm magnitude and the smallest denominator seen during one evaluation."""

    __slots__ = ("scale", "min_denominator")

    def __init__(self):
        self.scale = 0.0
        self.min_denominator = math.inf

    def see(self, value: float) -> float:
        magnitude = abs(value)
        if magnitude > self.scale:
            self.scale = magnitude
        return value


Compiled = Callable[[Mapping[str, float], Optional[_Meter]], float]


def _real_power(base: float, exponent: float, exact: Optional[Fraction]) -> float:
    if base == 0.0 and exponent < 0:
        raise DomainError("zero raised to a negative power")
    if base < 0:
        if exact is not None and exact.denominator % 2:
            magnitude = (-base) ** exponent
            return -magnitude if exact.numerator % 2 else magnitude
        if exact is None and float(exponent).is_integer():
            return base ** int(exponent)
        raise DomainError(f"negative base {base:g} raised to a non-integer power")
    try:
        return base ** exponent
    except OverflowError:
        raise DomainError("power overflow")


@singledispatch
def _compile(e: Expr) -> Compiled:
    raise TypeError(f"cannot evaluate a {type(e).__name__}")


@_compile.register
def _(e: Constant) -> Compiled:
    value = float(e.value)
    return lambda bindings, meter: value


@_compile.register
def _(e: NamedConstant) -> Compiled:
    name = e.name

    def run(bindings, meter):
        try:
            return bindings[name]
        except KeyError:
            raise UnboundSymbol(name) from None

    return run


@_compile.register
def _(e: Variable) -> Compiled:
    return _compile(NamedConstant(e.name))


@_compile.register
def _(e: Sum) -> Compiled:
    terms = [_compile(term) for term in e.terms]

    def run(bindings, meter):
        values = [term(bindings, meter) for term in terms]
        if meter is not None:
            for value in values:
                meter.see(value)
        return math.fsum(values)

    return run


@_compile.register
def _(e: Product) -> Compiled:
    factors = [_compile(factor) for factor in e.factors]

    def run(bindings, meter):
        result = 1.0
        for factor in factors:
            result *= factor(bindings, meter)
        return result

    return run


@_compile.register
def _(e: Power) -> Compiled:
    base = _compile(e.base)
    exponent = _compile(e.exponent)
    exact = e.exponent.value if isinstance(e.exponent, Constant) else None

    def run(bindings, meter):
        b = base(bindings, meter)
        p = exponent(bindings, meter)
        if p < 0 and meter is not None:
            meter.min_denominator = min(meter.min_denominator, abs(b))
        return _real_power(b, p, exact)

    return run


@_compile.register
def _(e: Exp) -> Compiled:
    arg = _compile(e.arg)

    def run(bindings, meter):
        try:
            return math.exp(arg(bindings, meter))
        except OverflowError:
            raise DomainError("exp overflow") from None

    return run


@_compile.register
def _(e: Log) -> Compiled:
    arg = _compile(e.arg)

    def run(bindings, meter):
        value = arg(bindings, meter)
        if value <= 0:
            raise DomainError(f"log of non-positive value {value:g}")
        return math.log(value)

    return run


@_compile.register
def _(e: Neg) -> Compiled:
    arg = _compile(e.arg)
    return lambda bindings, meter: -arg(bindings, meter)


@lru_cache(maxsize=1 << 12)
def compile_expr(e: Expr) -> Compiled:
    """
    Turn an expression into a closure ``fn(bindings, meter=None) -> float``.
    """

    run = _compile(e)

    def evaluate(bindings: Mapping[str, float], meter: Optional[_Meter] = None) -> float:
        try:
            return run(bindings, meter)
        except ZeroDivisionError:
            raise DomainError("division by zero") from None

    return evaluate


def eval_expr(e: Expr, bindings: Optional[Mapping[str, float]] = None, **kwargs: float) -> float:
    """
    Evaluate an expression in double precision.

    :param e: expression
    :param bindings: values of the variables and named constants
    :param kwargs: more bindings, e.g. ``eval_expr(e, x=2.0)``
    :return: the value
    :raises DomainError: log of a non-positive number, zero to a negative power, overflow
    :raises UnboundSymbol: a symbol without a value
    """

    values = dict(bindings or {})
    values.update(kwargs)
    return compile_expr(e)(values)


# poles

def _singular_parts(e: Expr, found: set) -> None:
    if isinstance(e, Power) and isinstance(e.exponent, Constant) and e.exponent.value < 0:
        found.add(e.base)
    if isinstance(e, Log):
        found.add(e.arg)
    for child in children(e):
        _singular_parts(child, found)


def detect_poles(e: Expr, var: str, window: Interval, grid: int = 2001) -> List[float]:
    """
    Locate the real zeros of the denominators and logarithm arguments of an expression.

    Each candidate is sampled on a uniform grid; sign changes and exact zeros are refined by bisection. Candidates
    that involve named constants or symbols other than ``var`` are skipped.

    :param e: expression
    :param var: variable
    :param window: search range
    :param grid: number of grid points
    :return: sorted pole positions
    """

    found: set = set()
    _singular_parts(normalize(e), found)
    xs = np.linspace(window.lo, window.hi, grid)
    poles = set()
    for part in found:
        if free_symbols(part) - {var} or named_constants(part):
            continue
        fn = compile_expr(part)

        def value(x):
            try:
                return fn({var: float(x)})
            except (DomainError, OverflowError):
                return math.nan

        values = np.array([value(x) for x in xs])
        for i in range(grid - 1):
            a, b = values[i], values[i + 1]
            if a == 0:
                poles.add(round(float(xs[i]), 12))
            elif not (math.isnan(a) or math.isnan(b)) and a * b < 0:
                poles.add(round(brentq(value, xs[i], xs[i + 1], xtol=1e-14), 12))
    if poles:
        logger.debug("poles of %s: %s", e, sorted(poles))
    return sorted(poles)


@lru_cache(maxsize=1024)
def guarded_poles(e: Expr, var: str, domain: Interval) -> Tuple[float, ...]:
    """Poles of e within a guard band of the domain."""

    window = Interval(domain.lo - GUARD_BAND, domain.hi + GUARD_BAND)
    return tuple(detect_poles(e, var, window, grid=401))


def near_pole(x: float, poles: Sequence[float]) -> bool:
    return any(abs(x - pole) < GUARD_BAND for pole in poles)


# sampling

def sample_points(domain: Interval, n: int = DEFAULT_SAMPLES, dims: int = 1) -> np.ndarray:
    """
    Deterministic Halton points, the first coordinate in the domain and the others in the parameter box.

    :param domain: interval of the first coordinate
    :param n: number of points
    :param dims: number of coordinates
    :return: array of shape (n, dims)
    """

    sampler = qmc.Halton(d=dims, scramble=False)
    # the first Halton point is the origin, i.e. an endpoint
    unit = sampler.random(n + 1)[1:]
    lower = [domain.lo] + [PARAMETER_BOX[0]] * (dims - 1)
    upper = [domain.hi] + [PARAMETER_BOX[1]] * (dims - 1)
    return qmc.scale(unit, lower, upper)


Extra = Mapping[str, Callable[[float], float]]


def _bindings_at(point: Sequence[float], var: str, parameters: Sequence[str], extra: Optional[Extra]) -> Dict[str, float]:
    bindings = {var: float(point[0])}
    for name, value in zip(parameters, point[1:]):
        bindings[name] = float(value)
    for name, fn in (extra or {}).items():
        bindings[name] = fn(bindings[var])
    return bindings


def sample_values(e: Expr, var: str, domain: Interval, *, extra: Optional[Extra] = None,
                  samples: int = DEFAULT_SAMPLES) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluate an expression at the sample points of a domain.

    Points where evaluation fails, the value is not finite, a denominator falls below ``DENOMINATOR_FLOOR``, or
    ``var`` lies within ``GUARD_BAND`` of a detected pole are marked invalid.

    :return: (x values, expression values, relative scales), invalid entries are NaN
    """

    parameters = sorted(named_constants(e))
    points = sample_points(domain, samples, 1 + len(parameters))
    poles = guarded_poles(e, var, domain)
    fn = compile_expr(e)
    values = np.full(samples, np.nan)
    scales = np.full(samples, np.nan)
    for i, point in enumerate(points):
        if near_pole(float(point[0]), poles):
            continue
        meter = _Meter()
        try:
            value = fn(_bindings_at(point, var, parameters, extra), meter)
        except (DomainError, OverflowError, ValueError):
            continue
        if not math.isfinite(value) or meter.min_denominator < DENOMINATOR_FLOOR:
            continue
        meter.see(value)
        values[i] = value
        scales[i] = 1.0 + meter.scale
    return points[:, 0], values, scales


def _symbols(var: str, extra: Optional[Extra]) -> Tuple[str, ...]:
    return (var,) + tuple(extra or ())


def is_identically_zero(e: Expr, var: str = "x", domain: Interval = DEFAULT_DOMAIN, *,
                        extra: Optional[Extra] = None, samples: int = DEFAULT_SAMPLES,
                        tol: float = DEFAULT_TOLERANCE, symbolic: bool = True, numeric: bool = True) -> Decision:
    """
    Decide e ≡ 0 on a domain.

    The symbolic tests come first: a zero canonical form is Yes, one nonzero term over a common denominator is No.
    Otherwise the expression is sampled at Halton points, each value measured
    relative to the largest subterm magnitude at that point: all below ``tol`` gives a numeric Yes, any above gives
    No, and fewer than half the points evaluable gives Unknown.

    :param e: expression in ``var``, the names in ``extra`` and named constants
    :param var: sampled variable
    :param domain: sampling interval of ``var``
    :param extra: symbols bound to functions of ``var`` when sampling, e.g. a quadrature integrating factor
    :param samples: number of sample points
    :param tol: relative tolerance
    :param symbolic: try the symbolic test first
    :param numeric: allow the sampling fallback
    :return: the decision
    """

    if symbolic:
        e = normalize(e)
        if is_zero_symbolic(e):
            return Decision(TriState.YES, Grade.SYMBOLIC)
        if isinstance(e, Constant) or is_single_term(e):
            return Decision(TriState.NO, Grade.SYMBOLIC)
    if not numeric:
        return Decision(TriState.UNKNOWN, Grade.SYMBOLIC)
    _, values, scales = sample_values(e, var, domain, extra=extra, samples=samples)
    valid = ~np.isnan(values)
    if valid.sum() < samples / 2:
        logger.debug("zero test of %s: only %d of %d points evaluable", e, int(valid.sum()), samples)
        return Decision(TriState.UNKNOWN, Grade.NUMERIC)
    relative = np.abs(values[valid]) / scales[valid]
    state = TriState.YES if relative.max() < tol else TriState.NO
    logger.debug("zero test of %s: %s, max relative %.3g", e, state.value, relative.max())
    return Decision(state, Grade.NUMERIC)


def spread_decision(values: np.ndarray, samples: int, tol: float) -> Decision:
    """
    Constancy of sampled values: (max - min) / (1 + |mean|) below ``tol``.

    :param values: samples, NaN marks an invalid point
    :param samples: number of points attempted
    :param tol: relative tolerance
    :return: numeric decision carrying the mean on Yes
    """

    valid = values[~np.isnan(values)]
    if len(valid) < samples / 2:
        return Decision(TriState.UNKNOWN, Grade.NUMERIC)
    mean = float(valid.mean())
    spread = float(valid.max() - valid.min()) / (1.0 + abs(mean))
    if spread < tol:
        return Decision(TriState.YES, Grade.NUMERIC, mean)
    return Decision(TriState.NO, Grade.NUMERIC)


def is_constant(e: Expr, var: str = "x", domain: Interval = DEFAULT_DOMAIN, *,
                extra: Optional[Extra] = None, dx: Optional[Callable[[Expr], Expr]] = None,
                samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOLERANCE,
                symbolic: bool = True, numeric: bool = True) -> Decision:
    """
    Decide whether an expression is constant on a domain, and find the constant.

    Symbolically the expression is constant when its canonical form is free of the variables, when numerator and
    denominator are proportional, or when its derivative vanishes. The numeric fallback compares the spread of
    sampled values with ``tol``.

    :param e: expression
    :param dx: total derivative to use instead of d/d``var``, needed when ``extra`` symbols depend on ``var``
    :return: decision; on Yes the value is an Expr when found symbolically, else the sampled mean
    """

    names = _symbols(var, extra)
    if symbolic:
        e = normalize(e)
        if not depends_on(e, names):
            return Decision(TriState.YES, Grade.SYMBOLIC, e)
        ratio = symbolic_ratio(e, names)
        if ratio is not None:
            return Decision(TriState.YES, Grade.SYMBOLIC, ratio)
        derivative = dx(e) if dx is not None else differentiate(e, var)
        if is_zero_symbolic(derivative):
            # constant without a closed form, e.g. log(2*x) - log(x)
            _, values, _ = sample_values(e, var, domain, extra=extra, samples=samples)
            valid = values[~np.isnan(values)]
            value = float(valid.mean()) if len(valid) else None
            return Decision(TriState.YES, Grade.SYMBOLIC, value)
    if not numeric:
        return Decision(TriState.UNKNOWN, Grade.SYMBOLIC)
    _, values, _ = sample_values(e, var, domain, extra=extra, samples=samples)
    decision = spread_decision(values, samples, tol)
    logger.debug("constancy test of %s: %s (%s)", e, decision.state.value, decision.grade.value)
    return decision


def as_float(value: Union[Expr, float, int, Fraction, None], bindings: Optional[Mapping[str, float]] = None) -> float:
    """Float of a decision value, an Expr being evaluated with the given bindings."""

    if value is None:
        return math.nan
    if isinstance(value, Expr):
        return eval_expr(value, bindings)
    return float(value)
