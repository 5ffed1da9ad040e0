import time

import pytest

from qmsearch.baselines import bench_sweep

BENCH_SEED = 2024
_acceptance = []


@pytest.fixture(scope="session")
def bench_run():
    """The n = 2..10, m = 6, 20-trial sweep, computed once per session."""
    t0 = time.perf_counter()
    recs = bench_sweep(range(2, 11), 6, 20, BENCH_SEED)
    return recs, time.perf_counter() - t0


@pytest.fixture
def bench_records(bench_run):
    return bench_run[0]


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
