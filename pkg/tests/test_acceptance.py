"""The fourteen acceptance criteria at full trial counts.

Each test runs one criterion with the master seed ``0``, prints one
pass/fail line with its statistics, and asserts both the verdict and the
stated runtime limit.  ``QCW_ACCEPTANCE_SCALE`` shrinks every trial count
for a quick look; verdicts below scale 1 are not meaningful.
"""

import os

import pytest

from qcw.harness.suite import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES

SCALE = float(os.environ.get("QCW_ACCEPTANCE_SCALE", "1.0"))
MASTER_SEED = 0


def _describe(result) -> str:
    stats = "; ".join(f"{r.metric}={r.estimate:.6g} vs {r.bound:.6g} ({r.rule}, {r.verdict})" for r in result.reports)
    return f"{result.line()} | {stats}"


@pytest.mark.slow
@pytest.mark.parametrize("index", sorted(CRITERIA), ids=lambda i: f"criterion-{i:02d}")
def test_criterion(index):
    result = run_criterion(index, MASTER_SEED, SCALE)
    line = _describe(result)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
    assert result.in_time, f"criterion {index} took {result.elapsed:.1f}s, limit {result.limit}s"
