import json
from pathlib import Path
from typing import IO, Dict, Iterator, List, Optional, Tuple

import numpy as np

from lienard_sym.cases import param_text
from lienard_sym.classify import SymmetryReport
from lienard_sym.generators import SymmetryGenerator


def to_jsonable(value):
    """
    Convert numpy scalars and arrays, Fractions and expressions into plain JSON values.

    :param value: any value found in a report
    :return: a value json.dumps accepts
    """

    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def generator_to_dict(generator: SymmetryGenerator) -> Dict[str, object]:
    return {
        "label": generator.label,
        "printable": generator.printable,
        "ty": str(generator),
        "tau": None if generator.tau is None else str(generator.tau),
        "eta": None if generator.eta is None else str(generator.eta),
        "tx": generator.text_x(),
        "tau_x": None if generator.tau_x is None else str(generator.tau_x),
        "eta_x": None if generator.eta_x is None else str(generator.eta_x),
        "certified": generator.certified,
        "residual": None if generator.residual is None else generator.residual.as_dict(),
    }


def report_to_dict(report: SymmetryReport, run: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    """
    JSON-ready view of a classification report.

    :param report: the report
    :param run: the run configuration, see :meth:`lienard_sym.config.RunConfig.as_dict`
    :return: nested dict of plain values
    """

    data = report.transform
    result = {
        "input": {"f": str(data.f), "g": str(data.g), "var": data.var},
        "transform": data.summary(),
        "case": {"name": report.case.name,
                 "params": {key: param_text(value) for key, value in report.case.params().items()}},
        "algebra": report.algebra_label,
        "dimension": report.dimension,
        "generators": [generator_to_dict(generator) for generator in report.generators],
        "decision_trace": [entry.as_dict() for entry in report.trace],
        "residuals": [residual.as_dict() for residual in report.residuals],
        "inconclusive": report.inconclusive,
        "notes": list(report.notes),
    }
    if run is not None:
        result["run"] = run
    return to_jsonable(result)


def dump_json(payload: Dict[str, object], indent: Optional[int] = 2) -> str:
    return json.dumps(to_jsonable(payload), indent=indent, ensure_ascii=False)


def write_json(payload: Dict[str, object], filepath) -> None:
    """
    Save a report as JSON

    :param payload: report dict
    :param filepath: file path to save
    """

    Path(filepath).write_text(dump_json(payload) + "\n", encoding="utf-8")


def read_batch(stream: IO[str]) -> Iterator[Tuple[int, str, str]]:
    """
    Read equations from lines ``f ; g``. Blank lines and lines starting with ``#`` are skipped.

    :param stream: text stream
    :return: (line number, f text, g text) in input order
    :raises ValueError: a line without exactly one ``;``
    """

    for number, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(";")
        if len(parts) != 2:
            raise ValueError(f"line {number}: expected 'f ; g', got {line!r}")
        yield number, parts[0].strip(), parts[1].strip()


def format_report(report: SymmetryReport) -> str:
    """
    Human-readable report.
    """

    data = report.transform
    summary = data.summary()
    lines = [
        f"equation   x'' + ({data.f})*x'^2 + ({data.g}) = 0 on {data.domain}",
        f"M          {summary['M']}",
        f"Phi        {summary['phi']}",
        f"G          {summary['G']}",
        f"case       {report.case.describe()}",
        f"algebra    {report.algebra_label}, dimension {report.dimension}",
        "generators",
    ]
    for generator in report.generators:
        status = "uncertified"
        if generator.residual is not None:
            status = f"{'pass' if generator.certified else 'FAIL'} {generator.residual.max_abs:.2e}"
        lines.append(f"  {generator.label}  {generator}  [{status}]")
        x_text = generator.text_x(data.var)
        if x_text is not None:
            lines.append(f"      in x: {x_text}")
    lines.append("decisions")
    for entry in report.trace:
        note = f"  ({entry.note})" if entry.note else ""
        lines.append(f"  {entry.test:<32} {entry.state.value:<8} {entry.grade.value}{note}")
    if report.residuals:
        lines.append("checks")
        for residual in report.residuals:
            note = f"  ({residual.note})" if residual.note else ""
            lines.append(f"  {residual.name:<20} {'pass' if residual.passed else 'FAIL'} "
                         f"{residual.max_abs:.2e} < {residual.tolerance:.0e}{note}")
    lines.extend(f"note: {note}" for note in report.notes)
    return "\n".join(lines)


def format_table(rows: List[Tuple[str, str, bool, str]]) -> str:
    """
    Pass/fail table of (case, check, passed, detail) rows.
    """

    width = max([len(row[0]) for row in rows] + [4])
    check_width = max([len(row[1]) for row in rows] + [5])
    lines = [f"{'case':<{width}}  {'check':<{check_width}}  result  detail"]
    for case, check, passed, detail in rows:
        lines.append(f"{case:<{width}}  {check:<{check_width}}  {'pass' if passed else 'FAIL':<6}  {detail}")
    failed = sum(1 for row in rows if not row[2])
    lines.append(f"{len(rows) - failed} passed, {failed} failed")
    return "\n".join(lines)
