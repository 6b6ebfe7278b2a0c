import enum
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from lienard_sym.evaluate import DEFAULT_DOMAIN, DEFAULT_SAMPLES, DEFAULT_TOLERANCE, DENOMINATOR_FLOOR, Interval
from lienard_sym.normalize import MAX_EXPAND_DEGREE

MIN_SAMPLES = 16


class Mode(enum.Enum):
    SYMBOLIC_FIRST = "symbolic-first"
    NUMERIC_ONLY = "numeric-only"


class Output(enum.Enum):
    TEXT = "text"
    JSON = "json"


@dataclass(frozen=True)
class Tolerances:
    """
    :param constancy: relative tolerance of sampled zero and constancy decisions
    :param residual: pass threshold of generator certification
    :param transform: pass threshold of the transformation check along a trajectory
    :param energy: pass threshold of the canonical energy drift
    """

    constancy: float = DEFAULT_TOLERANCE
    residual: float = 1e-8
    transform: float = 1e-6
    energy: float = 1e-7

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")

    def as_dict(self) -> Dict[str, float]:
        return {"constancy": self.constancy, "residual": self.residual, "transform": self.transform,
                "energy": self.energy}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one classification run depends on. ``as_dict`` goes into the JSON report so that a run can be
    repeated from its report.
    """

    f_text: str
    g_text: str
    domain: Interval = DEFAULT_DOMAIN
    mode: Mode = Mode.SYMBOLIC_FIRST
    verify: bool = False
    samples: int = DEFAULT_SAMPLES
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: Output = Output.TEXT
    x0: Optional[float] = None
    v0: float = 0.0
    t_end: float = 5.0
    h: float = 1e-3
    residual_samples: int = 100
    # g_text is the canonical force F(y) and g is built from it
    from_canonical: bool = False
    constants: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.samples < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {self.samples}")
        if self.h <= 0 or self.t_end <= 0:
            raise ValueError(f"step size and final time must be positive, got h={self.h}, t_end={self.t_end}")

    @property
    def numeric_only(self) -> bool:
        return self.mode is Mode.NUMERIC_ONLY

    @property
    def start(self) -> float:
        return self.domain.lo if self.x0 is None else self.x0

    def as_dict(self) -> Dict[str, object]:
        return {
            "f": self.f_text,
            "g": self.g_text,
            "domain": str(self.domain),
            "mode": self.mode.value,
            "verify": self.verify,
            "samples": self.samples,
            "tolerances": self.tolerances.as_dict(),
            "output": self.output.value,
            "x0": self.start,
            "v0": self.v0,
            "t_end": self.t_end,
            "h": self.h,
            "residual_samples": self.residual_samples,
            "from_canonical": self.from_canonical,
            "constants": list(self.constants),
            "max_expand_degree": MAX_EXPAND_DEGREE,
            "denominator_floor": DENOMINATOR_FLOOR,
        }
