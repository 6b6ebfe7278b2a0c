import enum
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Dict, Optional, Union

from lienard_sym.expr import Expr

# exact rational when decided symbolically, float when sampled, Expr for exact irrational values
Param = Union[Fraction, float, Expr]

A1 = "A1"
A2 = "A2"
SL2 = "A3,8 = sl(2,R)"
SL3 = "sl(3,R)"


def param_text(value: Optional[Param]) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, (Fraction, Expr, str)):
        return str(value)
    return repr(float(value))


def param_float(value: Optional[Param]) -> Optional[float]:
    if value is None:
        return None
    if isinstance(value, Expr):
        from lienard_sym.evaluate import eval_expr
        return eval_expr(value)
    return float(value)


@dataclass(frozen=True)
class CaseTag:
    """
    One branch of the classification of y'' + F(y) = 0. Subclasses carry the canonical parameters of F.
    """

    name = "CaseTag"
    dimension = 0
    algebra = ""

    def params(self) -> Dict[str, Optional[Param]]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def describe(self) -> str:
        params = ", ".join(f"{key}={param_text(value)}" for key, value in self.params().items())
        return f"{self.name}({params})"


@dataclass(frozen=True)
class Generic(CaseTag):
    name = "Generic"
    dimension = 1
    algebra = A1


@dataclass(frozen=True)
class PowerLaw(CaseTag):
    """
    F = (alpha + beta*y)^n = amplitude*(y + shift)^n, n not in {0, 1, -3}.

    alpha and beta are None when amplitude^(1/n) is not real.
    """

    n: Param
    alpha: Optional[Param]
    beta: Optional[Param]
    shift: Param
    amplitude: Param
    name = "PowerLaw"
    dimension = 2
    algebra = A2


@dataclass(frozen=True)
class Exponential(CaseTag):
    """F = exp(gamma*y + log amplitude), gamma != 0."""

    gamma: Param
    name = "Exponential"
    dimension = 2
    algebra = A2


@dataclass(frozen=True)
class InverseCube(CaseTag):
    """F = strength/(y + c)^3."""

    c: Param
    strength: Param
    name = "InverseCube"
    dimension = 3
    algebra = SL2


@dataclass(frozen=True)
class ErmakovPinney(CaseTag):
    """F = alpha*(y + c) + beta/(y + c)^3, beta != 0."""

    alpha: Param
    beta: Param
    c: Param
    name = "ErmakovPinney"
    dimension = 3
    algebra = SL2


class LinearSubcase(enum.Enum):
    ZERO = "Zero"
    CONSTANT = "Constant"
    HOMOGENEOUS = "Homogeneous"
    AFFINE = "Affine"


@dataclass(frozen=True)
class Linear(CaseTag):
    """
    F = a*y + b. The subcase only changes the report text; a and b are None when an inconclusive decision left
    them undetermined.
    """

    subcase: LinearSubcase
    a: Optional[Param] = Fraction(0)
    b: Optional[Param] = Fraction(0)
    name = "Linear"
    dimension = 8
    algebra = SL3

    def params(self) -> Dict[str, Optional[Param]]:
        return {"subcase": self.subcase.value, "a": self.a, "b": self.b}

    def describe(self) -> str:
        return f"Linear({self.subcase.value}, a={param_text(self.a)}, b={param_text(self.b)})"
