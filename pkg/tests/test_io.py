import io
import json
from fractions import Fraction

import numpy as np
import pytest

from lienard_sym.classify import classify
from lienard_sym.io import dump_json, format_report, format_table, read_batch, report_to_dict, to_jsonable, write_json
from lienard_sym.parse import parse
from lienard_sym.transform import LienardInput


@pytest.fixture(scope="module")
def power_report():
    return classify(LienardInput.from_text("0", "x^3"))


def test_to_jsonable():
    value = {"a": np.float64(1.5), "b": np.arange(2), "c": (Fraction(1, 2), parse("x")), "d": float("nan"), 1: True}
    assert to_jsonable(value) == {"a": 1.5, "b": [0, 1], "c": ["1/2", "x"], "d": None, "1": True}


def test_report_to_dict(power_report):
    payload = report_to_dict(power_report, {"samples": 64})
    assert payload["case"] == {"name": "PowerLaw",
                               "params": {"n": "3", "alpha": "0", "beta": "1", "shift": "0", "amplitude": "1"}}
    assert payload["algebra"] == "A2"
    assert payload["dimension"] == 2
    assert [g["label"] for g in payload["generators"]] == ["X1", "X2"]
    assert payload["generators"][1]["certified"]
    assert payload["generators"][1]["residual"]["pass"]
    assert payload["decision_trace"][0] == {"test": "F ≡ 0", "state": "no", "grade": "symbolic", "note": ""}
    assert payload["run"] == {"samples": 64}
    assert json.loads(dump_json(payload)) == payload


def test_write_json(tmp_path, power_report):
    target = tmp_path / "report.json"
    write_json(report_to_dict(power_report), target)
    assert json.loads(target.read_text(encoding="utf-8"))["case"]["name"] == "PowerLaw"


def test_format_report(power_report):
    text = format_report(power_report)
    assert "case       PowerLaw(n=3, alpha=0, beta=1, shift=0, amplitude=1)" in text
    assert "algebra    A2, dimension 2" in text
    assert "in x: (t)*d/dt + (-x)*d/dx" in text
    assert "K constant" in text


def test_read_batch():
    stream = io.StringIO("# header\n0 ; x^3\n\n1/x;x/2\n")
    assert list(read_batch(stream)) == [(2, "0", "x^3"), (4, "1/x", "x/2")]
    with pytest.raises(ValueError, match="line 1"):
        list(read_batch(io.StringIO("0 ; x ; 1\n")))


def test_format_table():
    text = format_table([("power", "classification", True, "ok"), ("ep", "certification", False, "failed X2")])
    lines = text.splitlines()
    assert lines[0].split() == ["case", "check", "result", "detail"]
    assert "FAIL" in lines[2]
    assert lines[-1] == "1 passed, 1 failed"
