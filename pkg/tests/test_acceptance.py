"""The nine acceptance criteria, one test each, exact tolerance.

Every criterion prints its own PASS/FAIL line with capture suspended, so
the suite's verdict is readable straight off the pytest output. The shared
Bundle memoizes the headline attach run; criteria 3, 4, and 6 consume the
same decompositions.
"""

import time

import pytest

from heckephi.acceptance import CRITERIA, Bundle, CriterionResult


@pytest.fixture(scope="module")
def acceptance_bundle():
    return Bundle(seed=0)


@pytest.mark.parametrize(
    "number,name,fn", CRITERIA, ids=[f"criterion{n}" for n, _, _ in CRITERIA]
)
def test_criterion(acceptance_bundle, capfd, number, name, fn):
    t0 = time.time()
    passed, detail = fn(acceptance_bundle)
    result = CriterionResult(number, name, passed, time.time() - t0, detail)
    with capfd.disabled():
        print(f"\n{result.line()}", flush=True)
    assert passed, result.line()


def test_all_nine_present():
    assert [n for n, _, _ in CRITERIA] == list(range(1, 10))
