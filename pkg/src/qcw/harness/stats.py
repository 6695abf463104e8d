"""Statistical reports with the one-sided three-standard-error rule."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as sps

SE_FACTOR = 3.0


@dataclass(frozen=True)
class StatReport:
    metric: str
    estimate: float
    std_err: float
    bound: float
    verdict: str  # "pass" or "fail"
    rule: str = "upper"  # "upper": estimate <= bound + 3 se; "lower": estimate >= bound - 3 se; "exact"; "pvalue"; "within"; "strict"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {k: (_clean(v) if isinstance(v, float) else v) for k, v in asdict(self).items()}


def _clean(x: float) -> float:
    # fixed precision keeps JSON reports byte-stable
    return float(f"{x:.12g}")


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def upper_report(metric: str, estimate: float, std_err: float, bound: float) -> StatReport:
    """Pass iff ``estimate <= bound + 3 se``; with zero variance the comparison is strict ``<=``."""
    return StatReport(metric, estimate, std_err, bound, _verdict(estimate <= bound + SE_FACTOR * std_err))


def lower_report(metric: str, estimate: float, std_err: float, bound: float) -> StatReport:
    return StatReport(metric, estimate, std_err, bound, _verdict(estimate >= bound - SE_FACTOR * std_err), "lower")


def exact_report(metric: str, estimate, target) -> StatReport:
    return StatReport(metric, float(estimate), 0.0, float(target), _verdict(estimate == target), "exact")


def within_report(metric: str, estimate: float, std_err: float, target: float) -> StatReport:
    """Pass iff ``|estimate - target| <= 3 se``."""
    return StatReport(metric, estimate, std_err, target, _verdict(abs(estimate - target) <= SE_FACTOR * std_err),
                      "within")


def strict_upper_report(metric: str, estimate: float, bound: float, std_err: float = 0.0) -> StatReport:
    """Pass iff ``estimate < bound`` (tolerances stated as strict limits)."""
    return StatReport(metric, estimate, std_err, bound, _verdict(estimate < bound), "strict")


def proportion(successes: int, trials: int) -> tuple[float, float]:
    """Estimate and standard error of a Bernoulli rate."""
    if trials < 1:
        raise ValueError("need at least one trial")
    p = successes / trials
    return p, math.sqrt(p * (1 - p) / trials)


def rate_upper(metric: str, events: int, trials: int, bound: float) -> StatReport:
    p, se = proportion(events, trials)
    return upper_report(metric, p, se, bound)


def rate_lower(metric: str, events: int, trials: int, bound: float) -> StatReport:
    p, se = proportion(events, trials)
    return lower_report(metric, p, se, bound)


def chi_square_uniform(metric: str, counts, alpha: float = 0.001) -> StatReport:
    """Goodness of fit to the uniform law; passes iff the p-value exceeds ``alpha``."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.sum() <= 0:
        raise ValueError("no observations")
    p = float(sps.chisquare(counts).pvalue)
    return StatReport(metric, p, 0.0, alpha, _verdict(p > alpha), "pvalue")


def mean_with_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("no observations")
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se
