import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import click

from lienard_sym import __version__
from lienard_sym.classify import SymmetryReport, classify, verify
from lienard_sym.config import Mode, Output, RunConfig, Tolerances
from lienard_sym.errors import InconclusiveClassification, LienardError
from lienard_sym.evaluate import Interval
from lienard_sym.io import dump_json, format_report, format_table, read_batch, report_to_dict, write_json
from lienard_sym.parse import parse
from lienard_sym.selftest import failed_cases, run_selftest
from lienard_sym.transform import LienardInput, lienard_from_canonical
from lienard_sym.utils import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONCLUSIVE = 2


@dataclass
class RunResult:
    exit_code: int
    report: Optional[SymmetryReport] = None
    error: Optional[str] = None

    def payload(self, config: RunConfig) -> Dict[str, object]:
        if self.report is None:
            return {"input": {"f": config.f_text, "g": config.g_text}, "error": self.error,
                    "exit_code": self.exit_code}
        payload = report_to_dict(self.report, config.as_dict())
        payload["exit_code"] = self.exit_code
        return payload


def build_input(config: RunConfig) -> LienardInput:
    """
    :raises ExprSyntaxError: malformed f or g
    :raises UnknownSymbol: f or g mentions anything but x and the declared constants
    :raises PullbackUnavailable: ``from_canonical`` with an f whose transformation has no closed form
    """

    if not config.from_canonical:
        return LienardInput.from_text(config.f_text, config.g_text, config.domain, constants=config.constants)
    f = parse(config.f_text, "x", config.constants)
    F = parse(config.g_text, "y", config.constants)
    return LienardInput(f, lienard_from_canonical(F, f, domain=config.domain), config.domain)


def run(config: RunConfig) -> RunResult:
    """
    Classify one equation and, when asked, verify the transformation along a trajectory.

    :return: exit code 0 for a certain classification, 1 for an input error, 2 for an inconclusive one
    """

    try:
        input = build_input(config)
    except LienardError as error:
        return RunResult(EXIT_INPUT, error=str(error))
    code = EXIT_OK
    try:
        report = classify(input, numeric_only=config.numeric_only, samples=config.samples,
                          tol=config.tolerances.constancy, residual_samples=config.residual_samples,
                          residual_tol=config.tolerances.residual)
    except InconclusiveClassification as error:
        report, code = error.report, EXIT_INCONCLUSIVE
    if config.verify:
        try:
            verify(report, input, config.start, config.v0, config.t_end, config.h, config.tolerances.transform,
                   config.tolerances.energy)
        except LienardError as error:
            logger.warning("verification failed: %s", error)
            report.notes.append(f"verification failed: {error}")
    return RunResult(code, report)


def _run_payload(config: RunConfig) -> Tuple[int, Dict[str, object]]:
    result = run(config)
    return result.exit_code, result.payload(config)


def run_batch(config: RunConfig, lines: List[Tuple[int, str, str]], jobs: int = 1) -> List[Tuple[int, Dict]]:
    """
    Classify many equations, results in input order.

    :param config: settings shared by every line
    :param lines: (line number, f text, g text)
    :param jobs: worker processes, 1 runs in this process
    :return: (exit code, payload) per line
    """

    configs = [replace(config, f_text=f_text, g_text=g_text) for _, f_text, g_text in lines]
    if jobs <= 1:
        results = [_run_payload(item) for item in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_run_payload, configs))
    for (number, _, _), (_, payload) in zip(lines, results):
        payload["line"] = number
    return results


def _domain(ctx, param, value) -> Interval:
    try:
        return Interval.from_text(value)
    except ValueError as error:
        raise click.BadParameter(str(error))


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for every decision.")
def main(verbose: int):
    """Lie point symmetries of x'' + f(x) x'^2 + g(x) = 0."""

    configure_logging(verbose)


@main.command("classify")
@click.option("--f", "f_text", help="Damping coefficient f(x).")
@click.option("--g", "g_text", help="Force g(x), or F(y) with --from-canonical.")
@click.option("--domain", default="1:2", show_default=True, callback=_domain, help="Sampling domain lo:hi.")
@click.option("--mode", type=click.Choice([mode.value for mode in Mode]), default=Mode.SYMBOLIC_FIRST.value,
              show_default=True)
@click.option("--verify", "verify_", is_flag=True, help="Integrate the equation and check the transformation.")
@click.option("--samples", type=click.IntRange(min=16), default=64, show_default=True)
@click.option("--tol-constancy", type=float, default=Tolerances.constancy, show_default=True)
@click.option("--tol-residual", type=float, default=Tolerances.residual, show_default=True)
@click.option("--tol-transform", type=float, default=Tolerances.transform, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Also write the JSON report to a file.")
@click.option("--batch", type=click.File("r"), help="File of 'f ; g' lines, prints one JSON object per line.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes for --batch.")
@click.option("--from-canonical", is_flag=True, help="Read --g as the canonical force F(y) and build g from it.")
@click.option("--constant", "constants", multiple=True, help="Name of a symbolic constant, repeatable.")
@click.option("--x0", type=float, default=None, help="Initial position for --verify, default is the domain's lower end.")
@click.option("--v0", type=float, default=0.0, show_default=True)
@click.option("--t-end", type=float, default=5.0, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.pass_context
def classify_command(ctx, f_text, g_text, domain, mode, verify_, samples, tol_constancy, tol_residual, tol_transform,
                     as_json, output, batch, jobs, from_canonical, constants, x0, v0, t_end, step):
    """Classify the point symmetries of one equation."""

    if batch is None and (f_text is None or g_text is None):
        raise click.UsageError("--f and --g are required without --batch")
    try:
        tolerances = Tolerances(tol_constancy, tol_residual, tol_transform)
        config = RunConfig(f_text or "", g_text or "", domain, Mode(mode), verify_, samples, tolerances,
                           Output.JSON if as_json or batch else Output.TEXT, x0, v0, t_end, step,
                           from_canonical=from_canonical, constants=tuple(constants))
    except ValueError as error:
        raise click.BadParameter(str(error))

    if batch is not None:
        try:
            lines = list(read_batch(batch))
        except ValueError as error:
            click.echo(f"error: {error}", err=True)
            ctx.exit(EXIT_INPUT)
        results = run_batch(config, lines, jobs)
        for _, payload in results:
            click.echo(dump_json(payload, indent=None))
        codes = {code for code, _ in results}
        ctx.exit(EXIT_INPUT if EXIT_INPUT in codes else EXIT_INCONCLUSIVE if EXIT_INCONCLUSIVE in codes else EXIT_OK)

    result = run(config)
    if result.report is None:
        click.echo(f"error: {result.error}", err=True)
        ctx.exit(result.exit_code)
    payload = result.payload(config)
    if output:
        write_json(payload, output)
    click.echo(dump_json(payload) if as_json else format_report(result.report))
    if result.exit_code == EXIT_INCONCLUSIVE:
        click.echo("classification inconclusive", err=True)
    ctx.exit(result.exit_code)


@main.command("selftest")
@click.option("--filter", "filter_", default=None, help="Run only cases with this tag, e.g. ep, linear, random, core.")
@click.option("--random", "random_instances", type=click.IntRange(min=0), default=200, show_default=True,
              help="Size of the randomized round trip.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--corrupt", multiple=True, hidden=True, help="Break the second generator of a case.")
@click.pass_context
def selftest_command(ctx, filter_, random_instances, seed, corrupt):
    """Run the acceptance catalogue and print a pass/fail table."""

    rows = run_selftest(filter_, corrupt, random_instances, seed)
    if not rows:
        click.echo(f"no selftest case matches {filter_!r}", err=True)
        ctx.exit(EXIT_INPUT)
    click.echo(format_table(rows))
    failed = failed_cases(rows)
    if failed:
        click.echo(f"failed: {', '.join(failed)}", err=True)
        ctx.exit(1)
    ctx.exit(EXIT_OK)


if __name__ == "__main__":
    main()
