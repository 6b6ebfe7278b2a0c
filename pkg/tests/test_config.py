import pytest

from lienard_sym.config import MIN_SAMPLES, Mode, Output, RunConfig, Tolerances
from lienard_sym.evaluate import Interval
from lienard_sym.normalize import MAX_EXPAND_DEGREE


def test_tolerances():
    assert Tolerances().as_dict() == {"constancy": 1e-9, "residual": 1e-8, "transform": 1e-6, "energy": 1e-7}
    with pytest.raises(ValueError, match="residual"):
        Tolerances(residual=0.0)


def test_run_config_defaults():
    config = RunConfig("0", "x^3")
    assert not config.numeric_only
    assert config.start == 1.0
    assert RunConfig("0", "x", Interval(2, 3)).start == 2.0
    assert RunConfig("0", "x", x0=1.5).start == 1.5
    assert RunConfig("0", "x", mode=Mode.NUMERIC_ONLY).numeric_only


def test_run_config_rejects_bad_values():
    with pytest.raises(ValueError):
        RunConfig("0", "x", samples=MIN_SAMPLES - 1)
    with pytest.raises(ValueError):
        RunConfig("0", "x", h=0.0)
    with pytest.raises(ValueError):
        RunConfig("0", "x", t_end=-1.0)


def test_run_config_as_dict():
    payload = RunConfig("0", "a*x", output=Output.JSON, constants=("a",)).as_dict()
    assert payload["domain"] == "[1, 2]"
    assert payload["mode"] == "symbolic-first"
    assert payload["output"] == "json"
    assert payload["constants"] == ["a"]
    assert payload["max_expand_degree"] == MAX_EXPAND_DEGREE
    assert payload["x0"] == 1.0
