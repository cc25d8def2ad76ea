"""Acceptance criteria, one test (and one printed PASS/FAIL line) each.

The lines are repeated in an "acceptance criteria" section at the end of
the pytest run; ``qillum verify`` prints the same lines.
"""
import pytest

from qillum import checks


@pytest.fixture(scope="module")
def sweeps():
    return checks.Sweeps(jobs=1)


@pytest.mark.parametrize("check", checks.CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check, sweeps, acceptance_log):
    result = check(sweeps)
    acceptance_log.append(result.line())
    print(result.line())
    assert result.passed, result.line()
