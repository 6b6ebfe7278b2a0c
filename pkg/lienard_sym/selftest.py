"""
Acceptance catalogue run by ``lienard-sym selftest``: classification of the reference equations, generator
certification with negative controls, the transformation and energy checks along trajectories, scaling invariance,
the randomized round trip and the expression-core property suites.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Collection, FrozenSet, List, Optional, Tuple

import numpy as np

from lienard_sym import random as lienard_random
from lienard_sym.calculus import antiderivative, differentiate
from lienard_sym.cases import SL2, SL3, A1, A2, CaseTag, Linear, param_float
from lienard_sym.classify import SymmetryReport, classify
from lienard_sym.errors import CannotIntegrate, DomainError, InconclusiveClassification, LienardError
from lienard_sym.evaluate import _Meter, compile_expr
from lienard_sym.expr import Constant, Product, Variable, to_text
from lienard_sym.generators import SymmetryGenerator, certify
from lienard_sym.normalize import is_zero_symbolic, normalize
from lienard_sym.oracle import (CONVERGENCE_FACTOR, canonical_energy_drift, canonical_force, check_transformation,
                                harmonic_errors, integrate_canonical, integrate_lienard, map_trajectory,
                                symmetry_residual)
from lienard_sym.parse import parse
from lienard_sym.transform import LienardInput

logger = logging.getLogger(__name__)

Row = Tuple[str, str, bool, str]

NEGATIVE_CONTROL_MARGIN = 1e-2
SCALES = (Fraction(1, 3), Fraction(2), Fraction(7))
CLOSED_FORM_TOLERANCE = 1e-5
# at least this share of the randomized instances must resolve on the symbolic path
SYMBOLIC_SHARE = 0.975


@dataclass(frozen=True)
class SelftestCase:
    name: str
    f: str
    g: str
    dimension: int
    algebra: str
    tags: FrozenSet[str]
    x0: float = 1.0
    v0: float = 0.0
    # closed-form y(t) of the canonical equation for the initial condition above
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None


CATALOGUE = (
    SelftestCase("generic", "0", "exp(x) + x^2", 1, A1, frozenset({"generic", "a1"})),
    SelftestCase("power", "0", "x^3", 2, A2, frozenset({"power", "a2"})),
    SelftestCase("exponential", "0", "exp(2*x)", 2, A2, frozenset({"exponential", "a2"})),
    SelftestCase("inverse_cube", "0", "x^(-3)", 3, SL2, frozenset({"inverse_cube", "sl2"})),
    SelftestCase("ep", "0", "x + x^(-3)", 3, SL2, frozenset({"ep", "sl2"})),
    SelftestCase("linear", "0", "x", 8, SL3, frozenset({"linear", "sl3"})),
    SelftestCase("linear_mapped", "1/x", "x/2", 8, SL3, frozenset({"linear", "sl3", "mapped"}),
                 closed_form=lambda t: 0.5 * np.cos(t)),
    SelftestCase("inverse_cube_mapped", "1", "exp(-4*x)", 3, SL2, frozenset({"inverse_cube", "sl2", "mapped"})),
)


def corrupt_generator(generator: SymmetryGenerator) -> SymmetryGenerator:
    """Add y^2 ∂y to a generator, which breaks the symmetry condition for every force in the catalogue."""

    if generator.printable:
        eta = normalize(generator.eta + Variable("y") ** 2)
        return SymmetryGenerator(generator.label, generator.tau, eta, generator.description)

    def jet(t, y):
        values = dict(generator.jet(t, y))
        values["eta"] += y * y
        values["eta_y"] += 2 * y
        values["eta_yy"] += 2.0
        return values

    return SymmetryGenerator(generator.label, None, None, generator.description + " + y^2*d/dy", jet)


def _classify_case(case: SelftestCase, corrupt: bool) -> SymmetryReport:
    input = LienardInput.from_text(case.f, case.g)
    report = classify(input, certify_generators=False)
    generators = list(report.generators)
    if corrupt:
        index = 1 if len(generators) > 1 else 0
        generators[index] = corrupt_generator(generators[index])
    report.generators = certify(generators, report.transform)
    return report


def _catalogue_rows(case: SelftestCase, report: SymmetryReport) -> List[Row]:
    rows = [(case.name, "classification",
             report.dimension == case.dimension and report.algebra_label == case.algebra,
             f"{report.case.describe()}, {report.algebra_label}, dimension {report.dimension}")]
    failed = [g.label for g in report.generators if not g.certified]
    worst = max((g.residual.max_abs for g in report.generators if g.residual is not None), default=math.nan)
    rows.append((case.name, "certification", not failed,
                 f"failed {', '.join(failed)}" if failed else f"max residual {worst:.2e}"))

    input = LienardInput.from_text(case.f, case.g)
    data = report.transform
    transformation = check_transformation(input, data, case.x0, case.v0)
    rows.append((case.name, "transformation", transformation.passed,
                 f"{transformation.max_abs:.2e} {transformation.note}".strip()))
    trajectory = integrate_lienard(input, case.x0, case.v0, 5.0, 1e-3)
    energy = canonical_energy_drift(trajectory, data)
    if energy is not None:
        rows.append((case.name, "energy", energy.passed, f"{energy.max_abs:.2e} {energy.note}".strip()))
    image = map_trajectory(trajectory, data)
    if case.closed_form is not None:
        error = float(np.max(np.abs(image.positions - case.closed_form(image.times))))
        rows.append((case.name, "closed form", error < CLOSED_FORM_TOLERANCE, f"{error:.2e}"))
    if "mapped" in case.tags:
        y0, w0 = image.states[0]
        canonical = integrate_canonical(canonical_force(data), float(y0), float(w0), 5.0, 1e-3)
        common = min(len(canonical), len(image))
        error = float(np.max(np.abs(canonical.positions[:common] - image.positions[:common])))
        rows.append((case.name, "canonical trajectory", error < CLOSED_FORM_TOLERANCE,
                     f"{error:.2e} up to t = {canonical.times[common - 1]:.3g}"))
    return rows


def _negative_control_rows(reports: List[Tuple[SelftestCase, SymmetryReport]]) -> List[Row]:
    rows = []
    for case_a, report_a in reports:
        for case_b, report_b in reports:
            # sl(3,R) contains every generator of the catalogue
            if report_a.algebra_label == report_b.algebra_label or isinstance(report_b.case, Linear):
                continue
            for generator in report_a.generators[1:]:
                residual = symmetry_residual(generator, report_b.transform)
                passed = residual.n_samples > 0 and residual.max_abs > NEGATIVE_CONTROL_MARGIN
                rows.append((case_b.name, f"control {case_a.name} {generator.label}", passed,
                             f"{residual.max_abs:.2e}"))
    return rows


def _scaling_rows(case: SelftestCase, dimension: int) -> List[Row]:
    rows = []
    input = LienardInput.from_text(case.f, case.g)
    for scale in SCALES:
        scaled = LienardInput(input.f, normalize(Product((Constant(scale), input.g))), input.domain)
        try:
            report = classify(scaled, certify_generators=False)
            rows.append((case.name, f"scaling {scale}", report.dimension == dimension,
                         f"dimension {report.dimension}"))
        except InconclusiveClassification as error:
            rows.append((case.name, f"scaling {scale}", False, f"inconclusive: {error.report.case.describe()}"))
    return rows


def same_case(found: CaseTag, expected: CaseTag, tol: float = 1e-6) -> bool:
    """Same case with parameters equal to within ``tol``, for values found by sampling."""

    if type(found) is not type(expected):
        return False
    for key, value in expected.params().items():
        other = found.params()[key]
        if isinstance(value, str) or value is None or other is None:
            if value != other:
                return False
            continue
        if abs(param_float(other) - param_float(value)) > tol * (1 + abs(param_float(value))):
            return False
    return True


def round_trip_rows(seed: int = 0, n: int = 200) -> List[Row]:
    """
    Classify equations built from catalogue forces and compare with the force they came from.
    """

    exact = numeric = inconclusive = 0
    wrong: List[str] = []
    uncertified: List[str] = []
    for index, instance in enumerate(lienard_random.gen_random_instances(seed, n)):
        label = f"#{index} f={instance.f} F={instance.F}"
        try:
            report = classify(LienardInput(instance.f, instance.g))
        except InconclusiveClassification:
            inconclusive += 1
            continue
        except LienardError as error:
            wrong.append(f"{label}: {type(error).__name__}: {error}")
            continue
        if report.case == instance.expected:
            exact += 1
        elif same_case(report.case, instance.expected):
            numeric += 1
        else:
            wrong.append(f"{label}: {report.case.describe()} != {instance.expected.describe()}")
            continue
        if not all(g.certified for g in report.generators if g.residual is not None):
            uncertified.append(label)
    for line in wrong + uncertified:
        logger.warning("round trip: %s", line)
    rows = [("random", "round trip symbolic", exact >= math.ceil(SYMBOLIC_SHARE * n),
             f"{exact} exact, {numeric} numeric, {inconclusive} inconclusive of {n}"),
            ("random", "round trip misclassified", not wrong, f"{len(wrong)} misclassified")]
    if n:
        rows.append(("random", "round trip certification", not uncertified, f"{len(uncertified)} failed"))
    return rows


# expression core

INTEGRANDS = ("1", "x^(-1)", "x^3 - 2*x", "(1 + 2*x)^(-2)", "(3*x + 1)^(1/2)", "exp(2*x + 1)", "x^2*exp(-x)",
              "x*(x + 1)^(1/2)", "5*x^(2/3)", "exp(x)/3 + x^(-1)")


def _finite_difference_error(e, x: float, h: float = 1e-5) -> Optional[float]:
    fn, dfn = compile_expr(e), compile_expr(differentiate(e))
    meter = _Meter()
    try:
        value = fn({"x": x}, meter)
        derivative = dfn({"x": x})
        numeric = (fn({"x": x + h}) - fn({"x": x - h})) / (2 * h)
    except (DomainError, OverflowError):
        return None
    if meter.min_denominator < 0.05 or not all(map(math.isfinite, (value, derivative, numeric))) or abs(value) > 1e4:
        return None
    return abs(derivative - numeric) / (1 + abs(derivative))


def core_rows(seed: int = 0) -> List[Row]:
    trees = lienard_random.gen_random_exprs(seed, 1000)
    idempotent = sum(normalize(normalize(e)) == normalize(e) for e in trees)
    parsed = 0
    for e in trees:
        try:
            parsed += normalize(parse(to_text(e))) == normalize(e)
        except LienardError as error:
            logger.warning("parser round trip failed on %s: %s", to_text(e), error)
    worst = 0.0
    rng = np.random.default_rng(seed)
    for e in trees[:500]:
        for x in rng.uniform(1.0, 2.0, 10):
            error = _finite_difference_error(e, float(x))
            if error is not None:
                worst = max(worst, error)
    integrated = 0
    for text in INTEGRANDS:
        e = parse(text)
        try:
            integrated += is_zero_symbolic(differentiate(antiderivative(e)) - e)
        except CannotIntegrate:
            pass
    errors = harmonic_errors()
    ratios = [coarse / fine for coarse, fine in zip(errors, errors[1:])]
    return [("core", "normalization idempotent", idempotent == len(trees), f"{idempotent}/{len(trees)}"),
            ("core", "parser round trip", parsed == len(trees), f"{parsed}/{len(trees)}"),
            ("core", "derivative", worst < 1e-6, f"max relative error {worst:.2e}"),
            ("core", "integration round trip", integrated == len(INTEGRANDS), f"{integrated}/{len(INTEGRANDS)}"),
            ("core", "rk4 convergence", min(ratios) >= CONVERGENCE_FACTOR,
             "error ratios " + ", ".join(f"{ratio:.1f}" for ratio in ratios))]


def run_selftest(filter: Optional[str] = None, corrupt: Collection[str] = (), random_instances: int = 200,
                 seed: int = 0, cases=CATALOGUE) -> List[Row]:
    """
    Run the acceptance catalogue.

    :param filter: run only catalogue cases with this tag, plus ``random`` or ``core`` when named
    :param corrupt: names of cases whose second generator is replaced by a broken one
    :param random_instances: size of the randomized round trip
    :param seed: seed of the randomized suites
    :return: (case, check, passed, detail) rows
    """

    selected = [case for case in cases if filter is None or filter in case.tags or filter == case.name]
    rows: List[Row] = []
    reports = []
    for case in selected:
        logger.info("selftest case %s", case.name)
        try:
            report = _classify_case(case, case.name in corrupt)
        except LienardError as error:
            rows.append((case.name, "classification", False, f"{type(error).__name__}: {error}"))
            continue
        reports.append((case, report))
        rows.extend(_catalogue_rows(case, report))
        rows.extend(_scaling_rows(case, case.dimension))
    rows.extend(_negative_control_rows(reports))
    if filter in (None, "random") and random_instances:
        logger.info("selftest randomized round trip, %d instances", random_instances)
        rows.extend(round_trip_rows(seed, random_instances))
    if filter in (None, "core"):
        logger.info("selftest expression core")
        rows.extend(core_rows(seed))
    return rows


def failed_cases(rows: List[Row]) -> List[str]:
    """Names of the cases with a failed row."""

    return sorted({case for case, _, passed, _ in rows if not passed})

