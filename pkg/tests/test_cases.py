from fractions import Fraction

from lienard_sym.cases import (A1, A2, SL2, SL3, ErmakovPinney, Exponential, Generic, InverseCube, Linear,
                               LinearSubcase, PowerLaw, param_float, param_text)
from lienard_sym.parse import parse


def test_dimensions_and_algebras():
    assert (Generic().dimension, Generic().algebra) == (1, A1)
    assert (Exponential(Fraction(1)).dimension, Exponential(Fraction(1)).algebra) == (2, A2)
    assert InverseCube(Fraction(0), Fraction(1)).algebra == SL2
    assert ErmakovPinney(Fraction(1), Fraction(1), Fraction(0)).dimension == 3
    assert (Linear(LinearSubcase.ZERO).dimension, Linear(LinearSubcase.ZERO).algebra) == (8, SL3)


def test_describe():
    assert Generic().describe() == "Generic()"
    assert PowerLaw(Fraction(3), None, None, 0.5, Fraction(-2)).describe() == \
        "PowerLaw(n=3, alpha=None, beta=None, shift=0.5, amplitude=-2)"
    assert Linear(LinearSubcase.AFFINE, Fraction(1), Fraction(1, 2)).describe() == "Linear(Affine, a=1, b=1/2)"


def test_params():
    assert Exponential(Fraction(2)).params() == {"gamma": Fraction(2)}
    assert Linear(LinearSubcase.CONSTANT, Fraction(0), Fraction(2)).params() == \
        {"subcase": "Constant", "a": Fraction(0), "b": Fraction(2)}


def test_param_conversions():
    assert param_text(None) is None
    assert param_text(Fraction(-3, 4)) == "-3/4"
    assert param_text(0.25) == "0.25"
    assert param_text(parse("2^(1/2)")) == "2^(1/2)"
    assert param_float(parse("2^(1/2)")) == 2 ** 0.5
    assert param_float(Fraction(1, 4)) == 0.25
    assert param_float(None) is None
