"""The ten acceptance criteria at their stated tolerances; one PASS/FAIL line each."""

import pytest

from fockmetrology import acceptance


@pytest.mark.parametrize("criterion", range(1, 11))
def test_criterion(criterion, capsys):
    res = acceptance.run_check(criterion)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
