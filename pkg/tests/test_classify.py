from fractions import Fraction

import pytest

from lienard_sym.cases import (SL2, SL3, ErmakovPinney, Exponential, Generic, InverseCube, Linear, LinearSubcase,
                               PowerLaw)
from lienard_sym.classify import PowerParams, classify, ermakov_pinney_test, extract_power_params, verify
from lienard_sym.errors import InconclusiveClassification
from lienard_sym.evaluate import TriState
from lienard_sym.expr import ONE, Constant, NamedConstant
from lienard_sym.normalize import normalize
from lienard_sym.parse import parse
from lienard_sym.transform import LienardInput, transform


def run(f, g, **kwargs):
    return classify(LienardInput.from_text(f, g), **kwargs)


@pytest.mark.parametrize("g, case", [
    ("x^3", PowerLaw(Fraction(3), Fraction(0), Fraction(1), Fraction(0), Fraction(1))),
    ("exp(2*x)", Exponential(Fraction(2))),
    ("x^(-3)", InverseCube(Fraction(0), Fraction(1))),
    ("x + x^(-3)", ErmakovPinney(Fraction(1), Fraction(1), Fraction(0))),
    ("4*(x + 1) + 7*(x + 1)^(-3)", ErmakovPinney(Fraction(4), Fraction(7), Fraction(1))),
    ("exp(x) + x^2", Generic()),
    ("0", Linear(LinearSubcase.ZERO)),
    ("2", Linear(LinearSubcase.CONSTANT, Fraction(0), Fraction(2))),
    ("x", Linear(LinearSubcase.HOMOGENEOUS, Fraction(1), Fraction(0))),
    ("x + 1", Linear(LinearSubcase.AFFINE, Fraction(1), Fraction(1))),
])
def test_undamped_cases(g, case):
    report = run("0", g)
    assert report.case == case
    assert not report.inconclusive


def test_power_law_report():
    report = run("0", "x^3")
    assert report.algebra_label == "A2"
    assert report.dimension == 2
    assert [entry.test for entry in report.trace] == [
        "F ≡ 0", "F'' ≡ 0", "F ≡ 0 (K)", "F' ≡ 0 (K)", "K constant", "d(nF/F')/dy - 1 ≡ 0", "nF/F' - Φ constant",
        "F*(y + shift)^(-n) constant"]
    assert not report.numeric
    time, scaling = report.generators
    assert time.tau == ONE
    assert scaling.tau == parse("t", var="t")
    assert scaling.eta == normalize(parse("-y", var="y"))
    assert scaling.eta_x == normalize(parse("-x"))
    assert report.certified


def test_exponential_generator():
    report = run("0", "exp(2*x)")
    assert report.generators[1].eta == Constant(-1)
    assert report.certified


def test_ermakov_pinney_generators_are_opaque_but_certified():
    report = run("0", "x + x^(-3)")
    assert report.case.algebra == SL2
    assert len(report.generators) == 3
    assert not report.generators[1].printable
    assert "cos(2*t)" in str(report.generators[1])
    assert "sin(2*t)" in str(report.generators[2])
    assert report.certified
    assert any("X2 stays in (t, y)" in note for note in report.notes)


def test_linear_lists_three_generators():
    report = run("0", "x")
    assert report.case.algebra == SL3
    assert report.dimension == 8
    assert len(report.generators) == 3
    assert any("8 generators" in note for note in report.notes)


def test_generic_keeps_time_translation():
    report = run("0", "exp(x) + x^2")
    assert report.dimension == 1
    assert [generator.label for generator in report.generators] == ["X1"]


def test_reciprocal_damping_is_linear():
    report = run("1/x", "x/2")
    assert report.case == Linear(LinearSubcase.HOMOGENEOUS, Fraction(1), Fraction(0))
    assert report.generators[1].eta_x == normalize(parse("1/x"))


def test_constant_damping_to_inverse_cube():
    report = run("1", "exp(-4*x)")
    assert report.case == InverseCube(Fraction(0), Fraction(1))
    assert report.generators[1].eta_x == ONE
    assert report.certified


def test_numeric_only_power_law():
    report = run("0", "x^3", numeric_only=True)
    case = report.case
    assert isinstance(case, PowerLaw)
    assert case.n == Fraction(3)
    # Φ by quadrature starts at the lower end of the domain, so y = x - 1
    assert case.shift == pytest.approx(1.0, abs=1e-6)
    assert float(case.amplitude) == pytest.approx(1.0, abs=1e-6)
    assert any("quadrature" in note for note in report.notes)


def test_inconclusive_classification():
    with pytest.raises(InconclusiveClassification) as info:
        run("0", "log(x - 3) + x")
    report = info.value.report
    assert report.inconclusive
    assert report.case == Generic()
    assert report.trace[0].state is TriState.UNKNOWN


def test_named_constants():
    report = classify(LienardInput.from_text("0", "a*x", constants=("a",)))
    assert report.case == Linear(LinearSubcase.HOMOGENEOUS, NamedConstant("a"), Fraction(0))
    assert [generator.label for generator in report.generators] == ["X1"]
    assert any("sign of a" in note for note in report.notes)
    assert any("free constants" in note for note in report.notes)


def test_extract_power_params():
    data = transform(LienardInput.from_text("0", "(2 + 3*x)^2"))
    params = extract_power_params(data, Fraction(1, 2))
    assert params == PowerParams(Fraction(2), Fraction(2), Fraction(3), Fraction(2, 3), Fraction(9))


@pytest.mark.parametrize("g", ["x^3", "x"])
def test_ermakov_pinney_test_rejects(g):
    state, params = ermakov_pinney_test(transform(LienardInput.from_text("0", g)))
    assert state is TriState.NO
    assert params is None


def test_ermakov_pinney_test_with_named_constants():
    input = LienardInput.from_text("0", "a*(x + c) + b*(x + c)^(-3)", constants=("a", "b", "c"))
    state, _ = ermakov_pinney_test(transform(input))
    assert state is TriState.YES


def test_verify():
    input = LienardInput.from_text("0", "x^3")
    report = classify(input)
    residuals = verify(report, input)
    assert [residual.name for residual in residuals] == ["transformation", "canonical energy"]
    assert all(residual.passed for residual in residuals)
    assert report.residuals == residuals


def test_trace_records_the_degeneracy_tests_of_K():
    report = run("0", "exp(x) + x^2")
    states = {entry.test: entry.state for entry in report.trace}
    assert states["F ≡ 0 (K)"] is TriState.NO
    assert states["F' ≡ 0 (K)"] is TriState.NO
    assert list(states).index("F' ≡ 0 (K)") < list(states).index("K constant")
