"""Acceptance gate: every stated guarantee runs end to end at full budget.

Each case drives one verification suite at its published tolerance and
replica count, prints the per-check lines, and enforces the wall-clock
budget. Seeds are fixed so reruns are bit-identical.
"""

import time

import pytest

from freewalk.verify import run_suites

CRITERIA = [
    ("finite-ust", 60.0),
    ("kirkhoff-formula", 30.0),
    ("level-consistency", 60.0),
    ("hitting-law", 120.0),
    ("green-identities", 60.0),
    ("gff-covariance", 60.0),
    ("tutte-embedding", 10.0),
    ("fsf-stability", 300.0),
    ("wilson-escape", 60.0),
]


@pytest.mark.parametrize("suite,budget", CRITERIA,
                         ids=[name for name, _ in CRITERIA])
def test_acceptance(suite, budget):
    start = time.monotonic()
    report = run_suites([suite], seed=0)
    elapsed = time.monotonic() - start
    for result in report.results:
        print(result.line())
    print(f"{suite}: {elapsed:.1f}s of {budget:.0f}s budget")
    assert elapsed <= budget, f"{suite} exceeded budget: {elapsed:.1f}s"
    assert report.all_passed, "\n" + "\n".join(
        r.line() for r in report.results if not r.passed)
