import json
import logging

import pytest
from click.testing import CliRunner

from lienard_sym import __version__
from lienard_sym.cli import main
from lienard_sym.evaluate import Interval
from lienard_sym.transform import lienard_from_canonical


@pytest.fixture(autouse=True)
def restore_logging():
    logger = logging.getLogger("lienard_sym")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_version():
    result = invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_classify_text():
    result = invoke("classify", "--f", "0", "--g", "x^3")
    assert result.exit_code == 0, result.output
    assert "PowerLaw(n=3" in result.output
    assert "algebra    A2, dimension 2" in result.output


def test_classify_json():
    result = invoke("classify", "--f", "0", "--g", "exp(2*x)", "--json")
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["case"]["name"] == "Exponential"
    assert payload["exit_code"] == 0
    assert payload["run"]["g"] == "exp(2*x)"


def test_classify_with_verification(tmp_path):
    target = tmp_path / "report.json"
    result = invoke("classify", "--f", "0", "--g", "x^3", "--verify", "-o", str(target))
    assert result.exit_code == 0, result.output
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert [residual["pass"] for residual in payload["residuals"]] == [True, True]


@pytest.mark.parametrize("g", ["x +", "t*x", "z"])
def test_input_errors(g):
    result = invoke("classify", "--f", "0", "--g", g)
    assert result.exit_code == 1
    assert "error:" in result.output


def test_missing_force_is_a_usage_error():
    result = invoke("classify", "--f", "0")
    assert result.exit_code == 2
    assert "--f and --g are required" in result.output


def test_bad_domain():
    result = invoke("classify", "--f", "0", "--g", "x", "--domain", "2:1")
    assert result.exit_code == 2


def test_inconclusive():
    result = invoke("classify", "--f", "0", "--g", "log(x - 3) + x")
    assert result.exit_code == 2
    assert "classification inconclusive" in result.output


def test_named_constant():
    result = invoke("classify", "--f", "0", "--g", "a*x", "--constant", "a")
    assert result.exit_code == 0, result.output
    assert "Linear(Homogeneous, a=a" in result.output


def test_from_canonical():
    result = invoke("classify", "--f", "1/x", "--g", "y", "--from-canonical", "--json")
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["input"]["g"] == "x/2"
    assert payload["case"]["params"]["subcase"] == "Homogeneous"


def test_from_canonical_uses_the_domain(monkeypatch):
    domains = []

    def spy(F, f, **kwargs):
        domains.append(kwargs.get("domain"))
        return lienard_from_canonical(F, f, **kwargs)

    monkeypatch.setattr("lienard_sym.cli.lienard_from_canonical", spy)
    result = invoke("classify", "--f", "1/x", "--g", "y", "--from-canonical", "--domain", "2:3", "--json")
    assert result.exit_code == 0, result.output
    assert domains == [Interval(2, 3)]
    payload = json.loads(result.output)
    assert payload["input"]["g"] == "x/2"
    assert payload["run"]["domain"] == str(Interval(2, 3))


def test_batch(tmp_path):
    batch = tmp_path / "equations.txt"
    batch.write_text("# f ; g\n0 ; x^3\n0 ; x +\n", encoding="utf-8")
    result = invoke("classify", "--batch", str(batch))
    assert result.exit_code == 1
    payloads = [json.loads(line) for line in result.output.splitlines() if line.startswith("{")]
    assert [payload["line"] for payload in payloads] == [2, 3]
    assert payloads[0]["case"]["name"] == "PowerLaw"
    assert payloads[1]["exit_code"] == 1
    assert "error" in payloads[1]


def test_selftest_passes():
    result = invoke("selftest", "--filter", "power", "--random", "0")
    assert result.exit_code == 0, result.output
    assert "0 failed" in result.output


def test_selftest_reports_a_corrupted_generator():
    result = invoke("selftest", "--filter", "power", "--random", "0", "--corrupt", "power")
    assert result.exit_code == 1
    assert "failed: power" in result.output


def test_selftest_without_a_match():
    result = invoke("selftest", "--filter", "nonexistent")
    assert result.exit_code == 1
    assert "no selftest case matches" in result.output
