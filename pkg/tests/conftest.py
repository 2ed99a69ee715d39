import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # for oracles.py

from avasym.pipeline import AnalysisRequest, analyze
from avasym.synthetic import write_synthetic_bundle

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixture_bundle(tmp_path_factory):
    """The shipped 60 s synthetic bundle, written once per session."""
    out = tmp_path_factory.mktemp("demo") / "bundle"
    paths = write_synthetic_bundle(str(out))
    return paths


@pytest.fixture(scope="session")
def analyzed_project(fixture_bundle):
    return analyze(AnalysisRequest(bundle_path=fixture_bundle["bundle"]))
