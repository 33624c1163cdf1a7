"""Shared test configuration and the acceptance summary report."""

import pytest

# Criterion number -> (passed, one-line detail).  Filled by test_acceptance.
_ACCEPTANCE = {}

_TITLES = {
    1: "oracle equivalence",
    2: "unitarity",
    3: "triple-run error orders",
    4: "oscillation physics",
    5: "expansion-order selection",
    6: "baseline convergence order",
    7: "cost-ratio trend",
    8: "pointer-state structure",
    9: "thread determinism",
}


def record_criterion(number: int, passed: bool, detail: str):
    _ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        title = _TITLES.get(number, "")
        terminalreporter.write_line(
            f"ACCEPTANCE {number} ({title}): {verdict} - {detail}")
    missing = sorted(set(_TITLES) - set(_ACCEPTANCE))
    if missing:
        terminalreporter.write_line(
            f"acceptance criteria not exercised this session: {missing}")


@pytest.fixture(scope="session")
def acceptance():
    return record_criterion
