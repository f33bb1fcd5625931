"""Acceptance criteria, one test each, at their fixed tolerances.

Each test prints its verdict line; the same lines are repeated in the
terminal summary so they show up even when output is captured.
"""
import os
import time

import pytest

from anharmonic import acceptance

import conftest

_START = time.perf_counter()
NESTED = os.environ.get("ANHARMONIC_SKIP_NESTED") == "1"


def _check(number: int):
    elapsed = time.perf_counter() - _START
    r = acceptance.run(number, elapsed)
    line = acceptance.format_line(r)
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert r.passed, line


@pytest.mark.parametrize("number", sorted(n for n in acceptance.CRITERIA if n != 14))
def test_criterion(number):
    _check(number)


@pytest.mark.skipif(NESTED, reason="already inside the invariant-suite run")
def test_criterion_14_invariant_suites():
    _check(14)
