"""
Numeric certification of the symbolic pipeline: fixed-step integration of both equations, the transformation
residual along trajectories, symmetry residuals of generators, sampled constancy, quadrature of M and Φ, and
energy conservation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.stats import qmc

from lienard_sym.calculus import antiderivative, differentiate
from lienard_sym.errors import CannotIntegrate, DomainError, PoleEncountered, QuadratureFailure
from lienard_sym.evaluate import (DEFAULT_SAMPLES, DEFAULT_TOLERANCE, Decision, Interval, _Meter,
                                  compile_expr, detect_poles, guarded_poles, near_pole, sample_values, spread_decision)
from lienard_sym.expr import Expr, Product, Variable
from lienard_sym.normalize import normalize
from lienard_sym.utils import warnings_raised_as

logger = logging.getLogger(__name__)

# |acceleration| beyond this counts as reaching a singularity
ACCELERATION_LIMIT = 1e8
# h^2 |da/dx| beyond this, once |da/dx| has grown STIFFNESS_GROWTH-fold since the start: the fixed step no
# longer resolves the motion, e.g. close to a collision
RESOLUTION_LIMIT = 2e-5
STIFFNESS_GROWTH = 4.0
QUADRATURE_RTOL = 1e-10
QUADRATURE_GRID = 64

T_BOX = (-2.0, 2.0)
V_BOX = (-2.0, 2.0)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    h: float
    order: int = 4
    truncated: bool = False
    reason: str = ""

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __len__(self):
        return len(self.times)


@dataclass
class ResidualReport:
    """
    Largest residual over a set of sample points.

    :param max_abs: largest residual; relative residuals are used where stated by the producing function
    :param argmax: sample point of the largest residual
    :param n_samples: number of points evaluated
    :param tolerance: pass threshold
    """

    name: str
    max_abs: float
    argmax: Tuple[float, ...]
    n_samples: int
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.n_samples > 0 and self.max_abs < self.tolerance

    def as_dict(self) -> Dict[str, object]:
        return {"name": self.name, "max_abs": self.max_abs, "argmax": [float(a) for a in self.argmax],
                "n_samples": self.n_samples, "tolerance": self.tolerance, "pass": self.passed, "note": self.note}


def _report(name: str, residuals: np.ndarray, points: Sequence, tolerance: float, note: str = "") -> ResidualReport:
    residuals = np.asarray(residuals, dtype=float)
    valid = ~np.isnan(residuals)
    if not valid.any():
        return ResidualReport(name, math.nan, (), 0, tolerance, note or "no evaluable points")
    index = int(np.nanargmax(residuals))
    point = points[index]
    argmax = tuple(float(p) for p in np.atleast_1d(point))
    return ResidualReport(name, float(residuals[index]), argmax, int(valid.sum()), tolerance, note)


# integration

def rk4(acceleration: Callable[[float, float], float], x0: float, v0: float, t_end: float, h: float, *,
        poles: Sequence[float] = (), strict: bool = False) -> Trajectory:
    """
    Classical fourth order Runge-Kutta for x'' = acceleration(x, x'), fixed step.

    The trajectory is truncated at the last finite state when a stage fails to evaluate, a value becomes
    non-finite, the acceleration exceeds ``ACCELERATION_LIMIT``, the step stops resolving a stiffness that
    keeps growing (``RESOLUTION_LIMIT``) or the position enters the guard band of a pole.

    :param acceleration: right-hand side
    :param x0: initial position
    :param v0: initial velocity
    :param t_end: final time
    :param h: step size
    :param poles: known singular positions
    :param strict: raise PoleEncountered instead of returning a truncated trajectory
    :return: the trajectory
    """

    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    steps = int(round(t_end / h))
    states = np.empty((steps + 1, 2))
    states[0] = x0, v0
    reason = ""

    def rhs(x, v):
        a = acceleration(x, v)
        if not math.isfinite(a) or abs(a) > ACCELERATION_LIMIT:
            raise DomainError(f"acceleration {a:g} at x = {x:g}")
        return v, a

    last = 0
    initial_stiffness = None
    for i in range(steps):
        x, v = states[i]
        try:
            k1 = rhs(x, v)
            k2 = rhs(x + 0.5 * h * k1[0], v + 0.5 * h * k1[1])
            k3 = rhs(x + 0.5 * h * k2[0], v + 0.5 * h * k2[1])
            k4 = rhs(x + h * k3[0], v + h * k3[1])
            delta = 1e-6 * (1.0 + abs(x))
            stiffness = abs(acceleration(x + delta, v) - acceleration(x - delta, v)) / (2 * delta)
        except (DomainError, OverflowError, ZeroDivisionError) as error:
            reason = str(error)
            break
        if initial_stiffness is None:
            initial_stiffness = stiffness
        if h * h * stiffness > RESOLUTION_LIMIT and stiffness > STIFFNESS_GROWTH * initial_stiffness:
            reason = f"step no longer resolves the motion at x = {x:g}"
            break
        x_next = x + h * (k1[0] + 2 * (k2[0] + k3[0]) + k4[0]) / 6
        v_next = v + h * (k1[1] + 2 * (k2[1] + k3[1]) + k4[1]) / 6
        if not (math.isfinite(x_next) and math.isfinite(v_next)):
            reason = "non-finite state"
            break
        if near_pole(x_next, poles):
            reason = f"guard band of a pole reached at x = {x_next:g}"
            break
        states[i + 1] = x_next, v_next
        last = i + 1
    trajectory = Trajectory(np.arange(last + 1) * h, states[:last + 1].copy(), h, 4, bool(reason), reason)
    if trajectory.truncated:
        logger.warning("trajectory truncated at t = %.4g: %s", trajectory.t_end, reason)
        if strict:
            raise PoleEncountered(trajectory, reason)
    return trajectory


def integrate_lienard(input, x0: float, v0: float, t_end: float, h: float, *, strict: bool = False) -> Trajectory:
    """
    Integrate x'' + f(x) x'^2 + g(x) = 0.

    :param input: a LienardInput or TransformData, anything with ``f``, ``g``, ``var`` and ``domain``
    :param x0: initial position
    :param v0: initial velocity
    :param t_end: final time
    :param h: step size
    :param strict: raise PoleEncountered on truncation
    :return: the trajectory of (x, x')
    """

    f, g = compile_expr(input.f), compile_expr(input.g)
    var = input.var
    poles = detect_poles(input.f, var, _window(input.domain)) + detect_poles(input.g, var, _window(input.domain))

    def acceleration(x, v):
        bindings = {var: x}
        return -f(bindings) * v * v - g(bindings)

    return rk4(acceleration, x0, v0, t_end, h, poles=poles, strict=strict)


def integrate_canonical(F_eval: Callable[[float], float], y0: float, v0: float, t_end: float, h: float, *,
                        poles: Sequence[float] = (), strict: bool = False) -> Trajectory:
    """
    Integrate y'' + F(y) = 0.

    :param F_eval: the canonical force as a function of y, e.g. from :func:`canonical_force`
    :return: the trajectory of (y, y')
    """

    return rk4(lambda y, v: -F_eval(y), y0, v0, t_end, h, poles=poles, strict=strict)


CONVERGENCE_STEPS = (1e-2, 5e-3, 2.5e-3)
# fourth order with a 10% band: each halving of h divides the error by at least 2^3 * 0.9
CONVERGENCE_FACTOR = 2 ** 3 * 0.9


def harmonic_errors(steps: Sequence[float] = CONVERGENCE_STEPS, t_end: float = 10.0) -> List[float]:
    """
    Endpoint errors of :func:`rk4` on y'' + y = 0, y(0) = 1, y'(0) = 0, against (cos t, -sin t).

    :param steps: step sizes
    :param t_end: final time
    :return: one error per step size
    """

    errors = []
    for h in steps:
        trajectory = rk4(lambda y, v: -y, 1.0, 0.0, t_end, h)
        t = trajectory.t_end
        y, v = trajectory.states[-1]
        errors.append(float(math.hypot(y - math.cos(t), v + math.sin(t))))
    return errors


def map_trajectory(trajectory: Trajectory, data) -> Trajectory:
    """
    Image of an x-trajectory under y = Φ(x), y' = M(x) x'.
    """

    x = trajectory.positions
    y = np.array([data.phi_value(float(xi)) for xi in x])
    M = np.array([data.M_value(float(xi)) for xi in x])
    states = np.column_stack((y, M * trajectory.velocities))
    return Trajectory(trajectory.times.copy(), states, trajectory.h, trajectory.order, trajectory.truncated,
                      trajectory.reason)


def _time_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """
    Richardson combination of two central differences, fourth order; the two points at each end are NaN.
    """

    result = np.full(len(values), np.nan)
    if len(values) < 5:
        return result
    narrow = (values[3:-1] - values[1:-3]) / (2 * h)
    wide = (values[4:] - values[:-4]) / (4 * h)
    result[2:-2] = (4 * narrow - wide) / 3
    return result


def check_transformation(input, data, x0: float, v0: float, t_end: float = 5.0, h: float = 1e-3,
                         tol: float = 1e-6, *, strict: bool = False) -> ResidualReport:
    """
    Integrate the Liénard equation and check that y = Φ(x(t)) solves y'' + F(y) = 0.

    Along the trajectory, w = M(x) x' is y'; the residual is |dw/dt + M g| / (1 + |M g|) with dw/dt from finite
    differences, endpoints excluded.

    :return: residual report; a truncated trajectory is noted
    """

    trajectory = integrate_lienard(input, x0, v0, t_end, h, strict=strict)
    x = trajectory.positions
    M = np.array([data.M_value(float(xi)) for xi in x])
    g = np.array([data.g_value(float(xi)) for xi in x])
    w = M * trajectory.velocities
    force = M * g
    residual = np.abs(_time_derivative(w, h) + force) / (1.0 + np.abs(force))
    note = f"trajectory truncated at t = {trajectory.t_end:.4g}" if trajectory.truncated else ""
    return _report("transformation", residual, trajectory.times, tol, note)


# symmetry residuals

T, Y, V, F, FP = (Variable(name) for name in ("t", "y", "v", "F", "Fp"))


def prolongation_residual(tau: Expr, eta: Expr) -> Expr:
    """
    Second prolongation of tau ∂t + eta ∂y applied to y'' + F(y) = 0, on solutions.

    The result is an expression in t, y, the velocity ``v``, the force ``F`` and its derivative ``Fp``; it vanishes
    identically exactly when the field is a point symmetry.
    """

    def d(e, *names):
        for name in names:
            e = differentiate(e, name)
        return e

    acceleration = -F
    eta2 = (d(eta, "t", "t") + V * (2 * d(eta, "t", "y") - d(tau, "t", "t"))
            + V ** 2 * (d(eta, "y", "y") - 2 * d(tau, "t", "y")) - V ** 3 * d(tau, "y", "y")
            + acceleration * (d(eta, "y") - 2 * d(tau, "t") - 3 * V * d(tau, "y")))
    return normalize(eta2 + FP * eta)


JET_KEYS = ("tau", "tau_t", "tau_y", "tau_tt", "tau_ty", "tau_yy", "eta", "eta_t", "eta_y", "eta_tt", "eta_ty",
            "eta_yy")


def jet_residual(jet: Dict[str, float], v: float, force: float, force_prime: float) -> Tuple[float, float]:
    """
    The prolongation residual from the partial derivatives of a field at one point.

    :return: (residual, largest term magnitude)
    """

    terms = (jet["eta_tt"], v * (2 * jet["eta_ty"] - jet["tau_tt"]), v * v * (jet["eta_yy"] - 2 * jet["tau_ty"]),
             -v ** 3 * jet["tau_yy"], -force * (jet["eta_y"] - 2 * jet["tau_t"] - 3 * v * jet["tau_y"]),
             force_prime * jet["eta"])
    return math.fsum(terms), max(abs(term) for term in terms)


def symmetry_box(data, samples: int) -> np.ndarray:
    """
    Halton points (t, x, v) with t and v in their boxes and x in the domain.

    Points within the guard band of a pole of G are dropped by :func:`symmetry_residual`.
    """

    sampler = qmc.Halton(d=3, scramble=False)
    unit = sampler.random(samples + 1)[1:]
    return qmc.scale(unit, [T_BOX[0], data.domain.lo, V_BOX[0]], [T_BOX[1], data.domain.hi, V_BOX[1]])


def symmetry_residual(generator, data, samples: int = 100, tol: float = 1e-8) -> ResidualReport:
    """
    Certify a generator against the canonical force of a transformation.

    Points (t, x, v) are sampled with y = Φ(x), F = G(x) and F' = dG/dy. The residual at a point is
    |R| / (1 + largest subterm), R the prolongation residual.

    :param generator: a SymmetryGenerator
    :param data: transformation whose force is tested
    :param samples: number of sample points
    :param tol: pass threshold
    :return: residual report with argmax (t, y, v)
    """

    from lienard_sym.transform import d_dy

    G = compile_expr(data.G)
    G_prime = compile_expr(d_dy(data.G, data))
    symbolic = generator.tau is not None and generator.eta is not None
    R = compile_expr(prolongation_residual(generator.tau, generator.eta)) if symbolic else None
    poles = guarded_poles(data.G, data.var, data.domain)
    residuals = np.full(samples, np.nan)
    points = np.zeros((samples, 3))
    for i, (t, x, v) in enumerate(symmetry_box(data, samples)):
        if near_pole(float(x), poles):
            continue
        try:
            bindings = data.bindings(float(x))
            y = data.phi_value(float(x))
            force, force_prime = G(bindings), G_prime(bindings)
            if symbolic:
                meter = _Meter()
                value = R({"t": t, "y": y, "v": v, "F": force, "Fp": force_prime}, meter)
                meter.see(value)
                scale = meter.scale
            else:
                value, scale = jet_residual(generator.jet(t, y), v, force, force_prime)
        except (DomainError, QuadratureFailure, OverflowError):
            continue
        if math.isfinite(value):
            residuals[i] = abs(value) / (1.0 + scale)
            points[i] = t, y, v
    return _report(f"symmetry {generator.label}", residuals, points, tol)


# constancy

def numeric_constancy(e: Union[Expr, Callable[[float], float]], domain: Interval, n: int = DEFAULT_SAMPLES,
                      tol: float = DEFAULT_TOLERANCE, var: str = "x", extra=None) -> Decision:
    """
    Sampled constancy: (max - min) / (1 + |mean|) < tol over n Halton points.

    :param e: expression or a function of one float
    :return: decision with the mean on Yes; Unknown when fewer than n/2 points were evaluable
    """

    if n < 16:
        raise ValueError(f"need at least 16 samples, got {n}")
    if isinstance(e, Expr):
        _, values, _ = sample_values(e, var, domain, extra=extra, samples=n)
    else:
        sampler = qmc.Halton(d=1, scramble=False)
        xs = qmc.scale(sampler.random(n + 1)[1:], [domain.lo], [domain.hi])[:, 0]
        values = np.full(n, np.nan)
        for i, x in enumerate(xs):
            try:
                value = e(float(x))
            except (DomainError, QuadratureFailure, OverflowError, ValueError):
                continue
            if math.isfinite(value):
                values[i] = value
    return spread_decision(values, n, tol)


# quadrature

def _quad(fn: Callable[[float], float], a: float, b: float) -> float:
    if a == b:
        return 0.0
    try:
        with warnings_raised_as(IntegrationWarning, QuadratureFailure):
            value, _ = quad(fn, a, b, epsrel=QUADRATURE_RTOL, epsabs=1e-13, limit=200)
    except (DomainError, ZeroDivisionError, OverflowError) as error:
        raise QuadratureFailure(f"integrand failed on [{a:g}, {b:g}]: {error}") from error
    if not math.isfinite(value):
        raise QuadratureFailure(f"non-finite integral on [{a:g}, {b:g}]")
    return value


class CumulativeIntegral:
    """
    x ↦ ∫_origin^x fn, memoized at the nodes of a uniform grid so that repeated queries cost one short quadrature.
    """

    def __init__(self, fn: Callable[[float], float], origin: float, step: float):
        self.fn = fn
        self.origin = origin
        self.step = step
        self._up: List[float] = [0.0]
        self._down: List[float] = [0.0]

    def _node(self, k: int) -> float:
        nodes, sign = (self._up, 1) if k >= 0 else (self._down, -1)
        while len(nodes) <= abs(k):
            j = len(nodes) - 1
            a = self.origin + sign * j * self.step
            nodes.append(nodes[-1] + _quad(self.fn, a, a + sign * self.step))
        return nodes[abs(k)]

    def __call__(self, x: float) -> float:
        k = int(round((x - self.origin) / self.step))
        node = self.origin + k * self.step
        return self._node(k) + _quad(self.fn, node, x)


class QuadratureM:
    """
    M(x) = exp(∫_lo^x f) and Φ(x) = ∫_lo^x M by adaptive quadrature.
    """

    def __init__(self, f: Callable[[float], float], domain: Interval):
        self.domain = domain
        step = domain.width / QUADRATURE_GRID
        self._log_M = CumulativeIntegral(f, domain.lo, step)
        self._phi = CumulativeIntegral(self.__call__, domain.lo, step)

    def log_value(self, x: float) -> float:
        return self._log_M(x)

    def __call__(self, x: float) -> float:
        try:
            return math.exp(self._log_M(x))
        except OverflowError:
            raise QuadratureFailure(f"M overflows at x = {x:g}") from None

    def phi(self, x: float) -> float:
        return self._phi(x)


def quadrature_M(f: Expr, domain: Interval, var: str = "x") -> QuadratureM:
    """
    Evaluable integrating factor for a damping coefficient without a closed-form integral.

    :raises QuadratureFailure: on evaluation, when the quadrature does not converge
    """

    fn = compile_expr(normalize(f))
    return QuadratureM(lambda x: fn({var: x}), domain)


def quadrature_phi(M: Callable[[float], float], domain: Interval) -> CumulativeIntegral:
    return CumulativeIntegral(M, domain.lo, domain.width / QUADRATURE_GRID)


# canonical force and energy

def monotone_window(data, grid: int = 401) -> Interval:
    """
    The stretch of the widened domain around the domain on which M is positive and finite, where Φ is strictly
    increasing.
    """

    wide = _window(data.domain)
    xs = np.linspace(wide.lo, wide.hi, grid)

    def admissible(x: float) -> bool:
        try:
            M = data.M_value(x)
            return math.isfinite(M) and M > 0 and math.isfinite(data.phi_value(x))
        except (DomainError, QuadratureFailure, OverflowError, ZeroDivisionError):
            return False

    ok = [admissible(float(x)) for x in xs]
    lo = int(np.searchsorted(xs, data.domain.lo))
    hi = int(np.searchsorted(xs, data.domain.hi, side="right")) - 1
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    while hi < grid - 1 and ok[hi + 1]:
        hi += 1
    if not (ok[lo] and ok[hi]):
        return data.domain
    return Interval(xs[lo], xs[hi])


def canonical_force(data, window: Optional[Interval] = None) -> Callable[[float], float]:
    """
    F(y) = G(Φ⁻¹(y)), inverting the monotone Φ with brentq.

    :param data: transformation
    :param window: x-range searched for the preimage, default is :func:`monotone_window`
    :return: F as a function of y
    :raises DomainError: on evaluation, for a y outside Φ(window)
    """

    G = data.G_value
    if data.phi is not None and data.phi == Variable(data.var):
        return G
    window = window or monotone_window(data)


    def force(y: float) -> float:
        try:
            x = brentq(lambda x: data.phi_value(x) - y, window.lo, window.hi, xtol=1e-14, rtol=1e-14)
        except ValueError as error:
            raise DomainError(f"y = {y:g} has no preimage in {window}") from error
        return G(x)

    return force


def canonical_potential(data) -> Optional[Expr]:
    """
    V(Φ(x)) with V' = F, i.e. the antiderivative of M·G in x.

    :return: the potential, or None without a closed form
    """

    if data.numeric_only:
        return None
    try:
        return antiderivative(normalize(Product((data.M, data.G))), data.var)
    except CannotIntegrate:
        return None


def energy_drift(trajectory: Trajectory, potential: Callable[[float], float], tol: float = 1e-7,
                 name: str = "energy") -> ResidualReport:
    """
    Drift of E = v²/2 + V(position) along a trajectory: max |E - E0| / (1 + |E0|).
    """

    energy = np.array([0.5 * v * v + potential(float(p)) for p, v in trajectory.states])
    drift = np.abs(energy - energy[0]) / (1.0 + abs(energy[0]))
    note = f"trajectory truncated at t = {trajectory.t_end:.4g}" if trajectory.truncated else ""
    return _report(name, drift, trajectory.times, tol, note)


def canonical_energy_drift(trajectory: Trajectory, data, tol: float = 1e-7) -> Optional[ResidualReport]:
    """
    Energy drift of the image of an x-trajectory: E = (M x')²/2 + V(Φ(x)).

    :return: the report, or None when the potential has no closed form
    """

    potential = canonical_potential(data)
    if potential is None:
        return None
    V = compile_expr(potential)
    var = data.var
    M = np.array([data.M_value(float(x)) for x in trajectory.positions])
    states = np.column_stack((trajectory.positions, M * trajectory.velocities))
    image = Trajectory(trajectory.times, states, trajectory.h, trajectory.order, trajectory.truncated,
                       trajectory.reason)
    return energy_drift(image, lambda x: V({var: x}), tol, "canonical energy")


# poles

def _window(domain: Interval) -> Interval:
    return Interval(domain.lo - 4.0, domain.hi + 4.0)

