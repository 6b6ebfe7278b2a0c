"""
Decision tree over the canonical force F(y) = G(x) along y = Φ(x): zero, linear, constant invariant K
(power law, exponential, inverse cube), Ermakov-Pinney, generic.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from lienard_sym.cases import (CaseTag, ErmakovPinney, Exponential, Generic, InverseCube, Linear, LinearSubcase,
                               Param, PowerLaw, param_float)
from lienard_sym.errors import (InconclusiveClassification, ParameterExtractionFailure, PullbackUnavailable,
                                QuadratureFailure, UnboundSymbol)
from lienard_sym.evaluate import (DEFAULT_SAMPLES, DEFAULT_TOLERANCE, Decision, Grade, TriState, compile_expr,
                                  is_constant, is_identically_zero)
from lienard_sym.expr import ONE, Constant, Expr, Neg, Power, Product, Sum, named_constants
from lienard_sym.generators import TIME_TRANSLATION, SymmetryGenerator, certify, generators_for, pullback_generator
from lienard_sym.normalize import constant_value, normalize
from lienard_sym.oracle import (ResidualReport, canonical_energy_drift, check_transformation, integrate_lienard,
                                numeric_constancy)
from lienard_sym.transform import LienardInput, TransformData, d_dy, invariant_K, total_dx, transform

logger = logging.getLogger(__name__)

# constancy of quantities that go through quadrature of M or Φ
QUADRATURE_TOLERANCE = 1e-6
# distance below which a sampled parameter counts as equal to an exceptional value
NUMERIC_MATCH = 1e-6


@dataclass(frozen=True)
class TraceEntry:
    test: str
    state: TriState
    grade: Grade
    note: str = ""

    def as_dict(self):
        return {"test": self.test, "state": self.state.value, "grade": self.grade.value, "note": self.note}


@dataclass
class SymmetryReport:
    """
    Outcome of :func:`classify`.

    :param case: classified case with its canonical parameters
    :param generators: point symmetries in (t, y), pulled back to (t, x) where possible
    :param trace: decisions in the order they were taken
    :param transform: the transformation the decisions ran on
    :param residuals: transformation and energy checks, filled by :func:`verify`
    :param inconclusive: some decision came out Unknown; ``case`` is the last certain verdict
    """

    case: CaseTag
    generators: List[SymmetryGenerator]
    trace: List[TraceEntry]
    transform: TransformData
    residuals: List[ResidualReport] = field(default_factory=list)
    inconclusive: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def algebra_label(self) -> str:
        return self.case.algebra

    @property
    def dimension(self) -> int:
        return self.case.dimension

    @property
    def certified(self) -> bool:
        return all(generator.certified for generator in self.generators)

    @property
    def numeric(self) -> bool:
        """Whether any decision used sampling, making the verdict relative to the domain."""

        return any(entry.grade is Grade.NUMERIC for entry in self.trace)


class _Inconclusive(Exception):
    pass


class _Decider:
    """Runs zero and constancy tests against one transformation and records them."""

    def __init__(self, data: TransformData, samples: int, tol: float, trace: Optional[List[TraceEntry]] = None):
        self.data = data
        self.samples = samples
        self.tol = tol
        self.trace = trace if trace is not None else []

    def record(self, test: str, decision: Decision, note: str = "") -> Decision:
        logger.debug("%s: %s (%s)", test, decision.state.value, decision.grade.value)
        self.trace.append(TraceEntry(test, decision.state, decision.grade, note))
        return decision

    def zero(self, test: str, e: Expr) -> Decision:
        data = self.data
        decision = is_identically_zero(e, data.var, data.domain, extra=data.extra, samples=self.samples, tol=self.tol)
        return self.record(test, decision)

    def constant(self, test: str, e: Expr, tol: Optional[float] = None) -> Decision:
        data = self.data
        decision = is_constant(e, data.var, data.domain, extra=data.extra, dx=lambda e: total_dx(e, data),
                               samples=self.samples, tol=tol or self.tol)
        return self.record(test, decision)

    def sampled_constant(self, test: str, fn, tol: float = QUADRATURE_TOLERANCE) -> Decision:
        decision = numeric_constancy(fn, self.data.domain, self.samples, tol)
        return self.record(test, decision, "through quadrature")

    def shift(self, test: str, e: Expr) -> Decision:
        """Constancy of e - Φ, numerically when Φ has no closed form."""

        data = self.data
        if data.phi is not None:
            return self.constant(test, Sum((e, Neg(data.phi))))
        fn = _compile_in_x(e, data)
        return self.sampled_constant(test, lambda x: fn(x) - data.phi_value(x))


def _compile_in_x(e: Expr, data: TransformData):
    run = compile_expr(normalize(e))
    return lambda x: run(data.bindings(x))


def _exact(value) -> Optional[Param]:
    """Rational parameters as Fractions, other symbolic values as Expr, sampled values as float."""

    if isinstance(value, Expr):
        q = constant_value(value)
        return q if q is not None else normalize(value)
    if value is None:
        return None
    return float(value)


def _equals(value: Param, target: Fraction) -> bool:
    if isinstance(value, Fraction):
        return value == target
    if isinstance(value, Expr) and named_constants(value):
        return normalize(Sum((value, Constant(-target)))) == Constant(0)
    return abs(param_float(value) - float(target)) < NUMERIC_MATCH * (1 + abs(float(target)))


def _as_expr(value: Param) -> Expr:
    if isinstance(value, Expr):
        return value
    return Constant(Fraction(value))


def _root(amplitude: Param, n: Param) -> Optional[Param]:
    """amplitude^(1/n) when real."""

    if isinstance(amplitude, float) or isinstance(n, float):
        a, p = float(param_float(amplitude)), float(param_float(n))
        if a > 0:
            return a ** (1 / p)
        q = Fraction(p).limit_denominator(1000)
        if abs(float(q) - p) < NUMERIC_MATCH and q.numerator % 2:
            # 1/n has an odd denominator
            return -((-a) ** (1 / p))
        return None
    if isinstance(amplitude, Fraction) and isinstance(n, Fraction):
        if amplitude < 0 and n.numerator % 2 == 0:
            return None
    return _exact(normalize(Power(_as_expr(amplitude), Power(_as_expr(n), Constant(-1)))))


def _affine_y(data: TransformData, shift: Optional[Param], fallback: Expr) -> Expr:
    """Φ + shift when both are exact, else ``fallback``, an expression equal to y + shift."""

    if data.phi is None or shift is None or isinstance(shift, float):
        return fallback
    return normalize(Sum((data.phi, _as_expr(shift))))


@dataclass(frozen=True)
class PowerParams:
    """F = amplitude*(y + shift)^n = (alpha + beta*y)^n."""

    n: Param
    alpha: Optional[Param]
    beta: Optional[Param]
    shift: Param
    amplitude: Param


def extract_power_params(data: TransformData, k: Param, *, samples: int = DEFAULT_SAMPLES,
                         tol: float = DEFAULT_TOLERANCE, trace: Optional[List[TraceEntry]] = None) -> PowerParams:
    """
    Read the parameters of F = (alpha + beta*y)^n from a constant invariant K = k != 1.

    With n = 1/(1 - k), L = n*F/F' equals y + shift; its y-derivative must be 1. The shift is L - Φ and the
    amplitude F*(Φ + shift)^(-n).

    :param data: transformation
    :param k: value of K
    :return: parameters; alpha and beta are None when amplitude^(1/n) is not real
    :raises ParameterExtractionFailure: L is not of the form y + shift
    """

    decider = _Decider(data, samples, tol, trace)
    if isinstance(k, float):
        n = 1.0 / (1.0 - k)
    else:
        n = _exact(normalize(Power(Sum((ONE, Neg(_as_expr(k)))), Constant(-1))))
    n_expr = _as_expr(n)
    L = normalize(Product((n_expr, data.G, Power(data.force_derivative(1), Constant(-1)))))
    unit = decider.zero("d(nF/F')/dy - 1 ≡ 0", Sum((d_dy(L, data), Constant(-1))))
    if not unit.yes:
        raise ParameterExtractionFailure(f"n*F/F' is not affine in y (test came out {unit.state.value})")
    shift = decider.shift("nF/F' - Φ constant", L)
    if not shift.yes:
        raise ParameterExtractionFailure("shift of the power law is not constant")
    shift_value = _exact(shift.value)
    amplitude = decider.constant("F*(y + shift)^(-n) constant",
                                 Product((data.G, Power(_affine_y(data, shift_value, L), Neg(n_expr)))))
    if not amplitude.yes:
        raise ParameterExtractionFailure("amplitude of the power law is not constant")
    amplitude_value = _exact(amplitude.value)
    if shift_value is None or amplitude_value is None:
        raise ParameterExtractionFailure("shift or amplitude has no value")
    beta = _root(amplitude_value, n)
    alpha = None if beta is None else _exact(normalize(Product((_as_expr(beta), _as_expr(shift_value)))))
    if isinstance(beta, float) or isinstance(shift_value, float):
        alpha = None if beta is None else param_float(beta) * param_float(shift_value)
    return PowerParams(n, alpha, beta, shift_value, amplitude_value)


def ermakov_pinney_test(data: TransformData, *, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOLERANCE,
                        trace: Optional[List[TraceEntry]] = None
                        ) -> Tuple[TriState, Optional[Tuple[Param, Param, Param]]]:
    """
    Test F = alpha*(y + c) + beta*(y + c)^(-3).

    For such F, u = -5F''/F''' equals y + c, so du/dy = 1 and F - u F' - u² F''/3 vanishes. Then
    c = u - Φ, and with u rebuilt as Φ + c, beta = F'' u^5 / 12 and alpha = F' + F'' u / 4.

    :param data: transformation
    :return: Yes with (alpha, beta, c), No, or Unknown
    """

    decider = _Decider(data, samples, tol, trace)
    F, F1, F2, F3 = (data.force_derivative(order) for order in range(4))
    degenerate = decider.zero("F''' ≡ 0", F3)
    if not degenerate.no:
        return (TriState.UNKNOWN if degenerate.unknown else TriState.NO), None
    u = normalize(Product((Constant(-5), F2, Power(F3, Constant(-1)))))
    for test, e in (("du/dy - 1 ≡ 0", Sum((d_dy(u, data), Constant(-1)))),
                    ("F - uF' - u²F''/3 ≡ 0",
                     Sum((F, Neg(Product((u, F1))), Product((Constant(Fraction(-1, 3)), Power(u, Constant(2)), F2)))))):
        decision = decider.zero(test, e)
        if not decision.yes:
            return decision.state, None
    c = decider.shift("u - Φ constant", u)
    if not c.yes:
        return c.state, None
    c_value = _exact(c.value)
    u = _affine_y(data, c_value, u)
    beta = decider.constant("F''u^5/12 constant", Product((Constant(Fraction(1, 12)), F2, Power(u, Constant(5)))))
    alpha = decider.constant("F' + F''u/4 constant", Sum((F1, Product((Constant(Fraction(1, 4)), F2, u)))))
    for decision in (beta, alpha):
        if not decision.yes:
            return decision.state, None
    return TriState.YES, (_exact(alpha.value), _exact(beta.value), c_value)


def _require(decision: Decision) -> Decision:
    if decision.unknown:
        raise _Inconclusive()
    return decision


def _linear_case(decider: _Decider) -> CaseTag:
    data = decider.data
    G, F1 = data.G, data.force_derivative(1)
    if _require(decider.zero("F' ≡ 0", F1)).yes:
        b = _require(decider.constant("F constant", G))
        return Linear(LinearSubcase.CONSTANT, Fraction(0), _exact(b.value))
    slope = _require(decider.constant("F' constant", F1))
    if not slope.yes:
        raise _Inconclusive()
    a = _exact(slope.value)
    if isinstance(a, float) or data.phi is None:
        fn = _compile_in_x(G, data)
        a_value = param_float(a)
        intercept = decider.sampled_constant("F - a*Φ constant", lambda x: fn(x) - a_value * data.phi_value(x))
    else:
        intercept = decider.constant("F - a*Φ constant", Sum((G, Neg(Product((_as_expr(a), data.phi))))))
    if not intercept.yes:
        return Linear(LinearSubcase.AFFINE, a, None)
    b = _exact(intercept.value)
    if b is not None and _equals(b, Fraction(0)):
        return Linear(LinearSubcase.HOMOGENEOUS, a, Fraction(0) if not isinstance(b, float) else 0.0)
    return Linear(LinearSubcase.AFFINE, a, b)


def _constant_K_case(decider: _Decider, k: Param) -> Optional[CaseTag]:
    data = decider.data
    if _equals(k, Fraction(1)):
        gamma = _require(decider.constant("F'/F constant", Product((data.force_derivative(1),
                                                                     Power(data.G, Constant(-1))))))
        if not gamma.yes:
            return None
        return Exponential(_exact(gamma.value))
    try:
        params = extract_power_params(data, k, samples=decider.samples, tol=decider.tol, trace=decider.trace)
    except ParameterExtractionFailure as error:
        if decider.trace and decider.trace[-1].state is TriState.UNKNOWN:
            raise _Inconclusive() from error
        logger.warning("power-law parameters not found, reporting Generic: %s", error)
        decider.trace.append(TraceEntry("power-law parameters", TriState.NO, Grade.NUMERIC, str(error)))
        return Generic()
    if _equals(params.n, Fraction(-3)):
        return InverseCube(params.shift, params.amplitude)
    if _equals(params.n, Fraction(0)) or _equals(params.n, Fraction(1)):
        return None
    return PowerLaw(params.n, params.alpha, params.beta, params.shift, params.amplitude)


def _decide(decider: _Decider) -> CaseTag:
    data = decider.data
    if _require(decider.zero("F ≡ 0", data.G)).yes:
        return Linear(LinearSubcase.ZERO)
    linear = _require(decider.zero("F'' ≡ 0", data.force_derivative(2)))
    if linear.yes:
        try:
            return _linear_case(decider)
        except _Inconclusive:
            return Linear(LinearSubcase.AFFINE, None, None)
    K = invariant_K(data, zero_test=decider.zero)
    constant_K = _require(decider.constant("K constant", K))
    if constant_K.yes:
        k = _exact(constant_K.value)
        if k is None:
            raise _Inconclusive()
        case = _constant_K_case(decider, k)
        if case is not None:
            return case
    state, params = ermakov_pinney_test(data, samples=decider.samples, tol=decider.tol, trace=decider.trace)
    if state is TriState.UNKNOWN:
        raise _Inconclusive()
    if state is TriState.YES:
        alpha, beta, c = params
        if _equals(alpha, Fraction(0)):
            return InverseCube(c, beta)
        return ErmakovPinney(alpha, beta, c)
    return Generic()


def _finish_generators(case: CaseTag, data: TransformData, certify_generators: bool, samples: int, tol: float,
                       notes: List[str]) -> List[SymmetryGenerator]:
    constants = named_constants(data.f) | named_constants(data.g)
    try:
        generators = generators_for(case)
    except UnboundSymbol as error:
        # the form of the generators depends on the sign of a free constant
        notes.append(f"only ∂t listed: generators depend on the sign of {error.name}")
        generators = [TIME_TRANSLATION]
    if certify_generators and not constants:
        generators = certify(generators, data, samples, tol)
    elif constants:
        notes.append("generators not certified: the equation has free constants")
    pulled = []
    for generator in generators:
        try:
            pulled.append(pullback_generator(generator, data))
        except PullbackUnavailable as error:
            notes.append(f"{generator.label} stays in (t, y): {error}")
            pulled.append(generator)
    if isinstance(case, Linear):
        notes.append("sl(3,R) has 8 generators; listed are ∂t and the two solution translations")
    return pulled


def classify(input: LienardInput, *, numeric_only: bool = False, samples: int = DEFAULT_SAMPLES,
             tol: float = DEFAULT_TOLERANCE, certify_generators: bool = True, residual_samples: int = 100,
             residual_tol: float = 1e-8, data: Optional[TransformData] = None) -> SymmetryReport:
    """
    Classify the point symmetries of x'' + f(x) x'^2 + g(x) = 0.

    Tests run in order and stop at the first Yes: F ≡ 0, F'' ≡ 0 (linear, subcase by F' and F - aΦ), K constant
    (exponential for K = 1, else power law or inverse cube from n = 1/(1-K)), the Ermakov-Pinney identities.
    Otherwise the force is generic.

    :param input: the equation
    :param numeric_only: carry M as a formal symbol evaluated by quadrature
    :param samples: sample points per numeric decision
    :param tol: relative tolerance of numeric decisions
    :param certify_generators: check every generator with the prolongation residual
    :param residual_samples: sample points of the residual check
    :param residual_tol: pass threshold of the residual check
    :param data: precomputed transformation
    :return: the report
    :raises InconclusiveClassification: a decision came out Unknown, the error carries the partial report
    """

    data = data or transform(input, numeric_only=numeric_only)
    decider = _Decider(data, samples, tol)
    inconclusive = False
    try:
        case = _decide(decider)
    except _Inconclusive:
        inconclusive = True
        case = Generic()
    except QuadratureFailure as error:
        logger.warning("quadrature failed during classification: %s", error)
        decider.trace.append(TraceEntry("quadrature", TriState.UNKNOWN, Grade.NUMERIC, str(error)))
        inconclusive = True
        case = Generic()
    if isinstance(case, Linear) and case.a is None:
        inconclusive = True
    notes: List[str] = []
    if data.numeric_only:
        notes.append("∫f has no closed form, M evaluated by quadrature")
    if any(entry.grade is Grade.NUMERIC for entry in decider.trace):
        notes.append(f"verdict relative to the sampling domain {data.domain}")
    generators = _finish_generators(case, data, certify_generators and not inconclusive, residual_samples,
                                    residual_tol, notes)
    report = SymmetryReport(case, generators, decider.trace, data, inconclusive=inconclusive, notes=notes)
    if inconclusive:
        logger.warning("classification inconclusive, last certain verdict %s", case.describe())
        raise InconclusiveClassification(report)
    logger.info("%s: %s, dimension %d", case.describe(), case.algebra, case.dimension)
    return report


def verify(report: SymmetryReport, input: LienardInput, x0: Optional[float] = None, v0: float = 0.0,
           t_end: float = 5.0, h: float = 1e-3, tol: float = 1e-6, energy_tol: float = 1e-7) -> List[ResidualReport]:
    """
    Integrate the equation and check the transformation along the trajectory, plus the canonical energy when the
    potential has a closed form. The reports are appended to ``report.residuals``.

    :param x0: initial position, default is the lower end of the domain
    :return: the new residual reports
    """

    data = report.transform
    x0 = input.domain.lo if x0 is None else x0
    reports = [check_transformation(input, data, x0, v0, t_end, h, tol)]
    energy = canonical_energy_drift(integrate_lienard(input, x0, v0, t_end, h), data, energy_tol)
    if energy is not None:
        reports.append(energy)
    report.residuals.extend(reports)
    for residual in reports:
        if not residual.passed:
            logger.warning("%s check failed: %.3g >= %.3g", residual.name, residual.max_abs, residual.tolerance)
    return reports

