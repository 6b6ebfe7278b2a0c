import io
import logging
import warnings

import pytest

from lienard_sym.errors import QuadratureFailure
from lienard_sym.utils import configure_logging, warnings_raised_as


@pytest.fixture
def package_logger():
    logger = logging.getLogger("lienard_sym")
    handlers, level = list(logger.handlers), logger.level
    yield logger
    logger.handlers[:] = handlers
    logger.setLevel(level)


@pytest.mark.parametrize("verbosity, level", [(0, logging.WARNING), (1, logging.INFO), (2, logging.DEBUG),
                                              (5, logging.DEBUG), (-1, logging.WARNING)])
def test_configure_logging_levels(package_logger, verbosity, level):
    configure_logging(verbosity, io.StringIO())
    assert package_logger.level == level


def test_configure_logging_replaces_its_handler(package_logger):
    stream = io.StringIO()
    configure_logging(1, io.StringIO())
    configure_logging(1, stream)
    assert len(package_logger.handlers) == 1
    logging.getLogger("lienard_sym.classify").info("PowerLaw found")
    assert stream.getvalue() == "INFO lienard_sym.classify: PowerLaw found\n"


def test_warnings_raised_as():
    with pytest.raises(QuadratureFailure, match="slow"):
        with warnings_raised_as(RuntimeWarning, QuadratureFailure):
            warnings.warn("slow", RuntimeWarning)
    with pytest.warns(UserWarning, match="other"):
        with warnings_raised_as(RuntimeWarning, QuadratureFailure):
            warnings.warn("other", UserWarning)
