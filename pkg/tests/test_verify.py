"""The randomised identity suite itself."""

import pytest

from fermi_asymptotics.verify import VerifyReport, IdentityResult, identity_suite


@pytest.mark.parametrize("n", [1, 2, 3])
def test_suite_passes(n):
    report = identity_suite(n, n_random=3, seed=n)
    assert report.passed, report.failures()
    names = {r.name for r in report.results}
    assert {"car_mixed", "crossed_homomorphism", "J_tomita", "doubled_H_vacuum"} <= names


def test_direct_only_suite():
    report = identity_suite(3, n_random=2, doubled=False)
    assert "J_tomita" not in {r.name for r in report.results}


def test_absurd_tolerance_fails():
    report = identity_suite(2, n_random=2, tol=1e-30)
    assert not report.passed
    assert report.to_dict()["failures"]


def test_report_helpers():
    rep = VerifyReport(2, [IdentityResult("a", 1e-15, 1e-10), IdentityResult("b", float("nan"), 1e-10)])
    assert not rep.passed
    assert [r.name for r in rep.failures()] == ["b"]
    lines = list(rep.lines())
    assert lines[0].startswith("PASS") and lines[1].startswith("FAIL")
