import os
import re

import pytest
from hypothesis import HealthCheck, settings

from uegs.modpoly import ModularPolynomial
from uegs.store import (
    load_modpoly_file,
    load_representation_file,
    modpoly_filename,
    packaged_data_dir,
    representation_filename,
)

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = packaged_data_dir()


@pytest.fixture(scope="session")
def modpolys() -> dict[int, ModularPolynomial]:
    return {ell: load_modpoly_file(DATA / modpoly_filename(ell)) for ell in (5, 7, 13)}


@pytest.fixture(scope="session")
def shipped_reps(modpolys):
    out = {}
    for ell, n in [(5, 2), (5, 4), (7, 2), (7, 3), (13, 3), (13, 4)]:
        out[(ell, n)] = load_representation_file(DATA / representation_filename(ell, n), modpolys[ell])
    return out


# one summary line per acceptance criterion

_CRITERIA: dict[int, tuple[str, str]] = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    m = _NAME.search(report.nodeid)
    if m:
        _CRITERIA[int(m.group(1))] = (m.group(2).replace("_", " "), report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome = _CRITERIA[num]
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"criterion {num} ({title}): {verdict}")
