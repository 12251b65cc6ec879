"""Verification harness plumbing: result lines, report JSON, suite registry."""

import pytest

from freewalk.verify import SUITES, CheckResult, run_suites


class TestCheckResult:
    def test_line_format(self):
        r = CheckResult("s", "n", True, 0.5, 1.0, "<=", "ok", 0.1)
        assert r.line() == "[PASS] s/n: 0.5 <= 1  (ok)"
        r = CheckResult("s", "n", False, 2.0, 1.0, "<=", "bad", 0.1)
        assert r.line().startswith("[FAIL] s/n:")

    def test_json_omits_wall_time(self):
        r = CheckResult("s", "n", True, 0.5, 1.0, "<=", "ok", 0.1)
        d = r.to_json()
        assert "seconds" not in d
        assert d["passed"] is True
        assert d["statistic"] == 0.5


class TestRunSuites:
    def test_unknown_suite_rejected(self):
        with pytest.raises(KeyError):
            run_suites(["no-such-suite"], seed=0)

    def test_registry_names(self):
        assert set(SUITES) == {
            "finite-ust", "kirkhoff-formula", "level-consistency",
            "hitting-law", "green-identities", "gff-covariance",
            "tutte-embedding", "fsf-stability", "wilson-escape",
        }

    def test_fast_suite_passes_and_reports(self):
        report = run_suites(["tutte-embedding"], seed=3)
        assert report.all_passed
        assert report.seed == 3
        assert len(report.results) >= 2
        assert {r.suite for r in report.results} == {"tutte-embedding"}
        d = report.to_json()
        assert d["all_passed"] is True
        assert len(d["results"]) == len(report.results)

    def test_same_seed_same_statistics(self):
        a = run_suites(["tutte-embedding"], seed=9)
        b = run_suites(["tutte-embedding"], seed=9)
        assert [r.statistic for r in a.results] == \
            [r.statistic for r in b.results]
