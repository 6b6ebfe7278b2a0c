import logging
import sys
import warnings
from contextlib import contextmanager
from typing import Type

_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def configure_logging(verbosity: int = 0, stream=None) -> None:
    """
    Send the package's log records to stderr. Only the command line calls this; the library never installs
    handlers.

    :param verbosity: 0 for warnings, 1 for info, 2 or more for debug
    :param stream: target stream, default is sys.stderr
    """

    logger = logging.getLogger("lienard_sym")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(_LEVELS[min(max(verbosity, 0), len(_LEVELS) - 1)])


@contextmanager
def warnings_raised_as(category: Type[Warning], error: Type[Exception]):
    """
    A context manager turning warnings of one category into an exception. Useful around scipy routines that only
    warn on non-convergence.

    Example usage:
    >>> from scipy.integrate import IntegrationWarning, quad
    >>> from lienard_sym.errors import QuadratureFailure
    >>> with warnings_raised_as(IntegrationWarning, QuadratureFailure):
    ...     quad(lambda x: 1 / x, 0, 1)
    Traceback (most recent call last):
    ...
    lienard_sym.errors.QuadratureFailure: ...

    :param category: warning category to intercept
    :param error: exception raised in its place
    :return: The context manager.
    """

    with warnings.catch_warnings():
        warnings.simplefilter("error", category)
        try:
            yield
        except category as warning:
            raise error(str(warning)) from warning
