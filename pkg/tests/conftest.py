from __future__ import annotations

from pathlib import Path

import pytest

from founder_success import synthetic

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance: list[tuple[str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion): acceptance criterion with a runtime budget")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _acceptance.append((marker.args[0], status, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, duration in _acceptance:
        terminalreporter.write_line(f"{status}  {criterion}  [{duration:.2f} s]")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def synth_pool(tmp_path_factory):
    """A clean synthetic pool: no messy replies, so the cache holds exactly
    four completions per founder."""
    return synthetic.generate(tmp_path_factory.mktemp("pool"), 170, 180, seed=3, messy_rate=0.0)


@pytest.fixture(scope="session")
def messy_pool(tmp_path_factory):
    return synthetic.generate(tmp_path_factory.mktemp("messy"), 160, 165, seed=5, messy_rate=0.05)
