import logging
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(autouse=True)
def _reset_package_logger():
    # the CLI installs its own handler and stops propagation; undo that for caplog
    yield
    logger = logging.getLogger("recbench")
    logger.handlers[:] = []
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
