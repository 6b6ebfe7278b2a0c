import random
from fractions import Fraction

import pytest

from lienard_sym.cases import ErmakovPinney, Exponential, PowerLaw
from lienard_sym.classify import classify
from lienard_sym.errors import InconclusiveClassification
from lienard_sym.expr import Constant
from lienard_sym.parse import parse
from lienard_sym.random import (DAMPING_KINDS, FORCE_KINDS, SINGULAR_MARGIN, gen_random_exprs, gen_random_instances,
                                phi_image, random_damping, random_force, random_instance, random_rational)
from lienard_sym.selftest import same_case
from lienard_sym.transform import LienardInput, integrating_factor, phi


def test_random_rational():
    rng = random.Random(1)
    values = [random_rational(rng, positive=True) for _ in range(200)]
    assert all(0 < value <= 9 for value in values)
    assert all(value.denominator <= 9 for value in values)


def test_seeded_generation_repeats():
    assert gen_random_exprs(3, 20) == gen_random_exprs(3, 20)
    assert gen_random_instances(3, 5) == gen_random_instances(3, 5)


@pytest.mark.parametrize("kind", DAMPING_KINDS)
def test_damping_has_closed_form_transformation(kind):
    rng = random.Random(7)
    for _ in range(5):
        f = random_damping(rng, kind)
        assert integrating_factor(f) is not None
        assert phi(f) is not None


def test_unknown_kinds():
    rng = random.Random(0)
    with pytest.raises(ValueError):
        random_damping(rng, "cubic")
    with pytest.raises(ValueError):
        random_force(rng, "cubic")


def test_power_force_parameters():
    F, case = random_force(random.Random(5), "power")
    assert isinstance(case, PowerLaw)
    assert case.shift == case.alpha / case.beta
    assert case.amplitude == case.beta ** case.n


@pytest.mark.parametrize("force_kind", FORCE_KINDS)
@pytest.mark.parametrize("damping_kind", DAMPING_KINDS)
def test_round_trip(force_kind, damping_kind):
    rng = random.Random(10 * FORCE_KINDS.index(force_kind) + DAMPING_KINDS.index(damping_kind))
    instance = random_instance(rng, force_kind, damping_kind)
    try:
        report = classify(LienardInput(instance.f, instance.g))
    except InconclusiveClassification as error:
        pytest.fail(f"{instance}: inconclusive, trace {error.report.trace}")
    assert same_case(report.case, instance.expected), (report.case.describe(), instance.expected.describe())


def test_same_case():
    assert same_case(Exponential(Fraction(2)), Exponential(Fraction(2)))
    assert same_case(Exponential(2.0000000001), Exponential(Fraction(2)))
    assert not same_case(Exponential(2.1), Exponential(Fraction(2)))
    assert not same_case(Exponential(Fraction(2)), PowerLaw(2, 0, 1, 0, 1))


def test_forces_draw_signed_parameters_clear_of_the_sampled_range():
    rng = random.Random(2)
    image = (1.0, 2.0)
    drawn = {kind: [random_force(rng, kind, image)[1] for _ in range(200)] for kind in FORCE_KINDS}
    assert any(case.alpha < 0 for case in drawn["ermakov_pinney"])
    assert any(case.beta < 0 for case in drawn["ermakov_pinney"])
    assert any(case.c < 0 for case in drawn["inverse_cube"])
    assert any(case.strength < 0 for case in drawn["inverse_cube"])
    assert any(case.shift < 0 for case in drawn["power"])
    for case in drawn["inverse_cube"] + drawn["ermakov_pinney"]:
        assert not 1.0 - SINGULAR_MARGIN <= -case.c <= 2.0 + SINGULAR_MARGIN
    for case in drawn["power"]:
        assert not 1.0 - SINGULAR_MARGIN <= -case.shift <= 2.0 + SINGULAR_MARGIN
        # the classifier reports the real root of the amplitude
        assert case.beta ** case.n == case.amplitude
        assert case.n % 2 or case.beta > 0


def test_phi_image():
    assert phi_image(Constant(0)) == (1.0, 2.0)
    low, high = phi_image(parse("1/x"))
    assert (low, high) == pytest.approx((0.5, 2.0))
    assert phi_image(parse("2*x")) is None


def test_ermakov_pinney_with_negative_alpha_round_trip():
    report = classify(LienardInput.from_text("0", "-(x + 1) + 2*(x + 1)^(-3)"))
    assert same_case(report.case, ErmakovPinney(Fraction(-1), Fraction(2), Fraction(1)))
    assert report.dimension == 3
    assert all(generator.certified for generator in report.generators if generator.residual is not None)
