import time

import pytest

import helpers

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def corpus12():
    """12 classes x 20 files, analyzed under the content profile; the build
    time is reported so the acceptance timing budget can include it."""
    start = time.monotonic()
    samples = helpers.corpus_samples(12, 20, seed=0)
    return samples, time.monotonic() - start


@pytest.fixture(scope="session")
def corpus12_cloned():
    return helpers.corpus_samples(12, 20, seed=0, clone_pairs=2)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line("%s  %s" % ("PASS" if outcome == "passed" else "FAIL", name))
