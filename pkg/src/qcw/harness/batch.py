"""Batches of sessions with per-session seeds derived from a master seed."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from ..errors import ParameterError
from .session import Outcome, Protocol, derive_seed, run_session
from .stats import StatReport, chi_square_uniform, rate_lower


def session_seed(master: int, index: int) -> int:
    return derive_seed(master, index)


@dataclass
class BatchResult:
    protocol: str
    trials: int
    accepted: int
    reasons: Counter = field(default_factory=Counter)
    values: Counter = field(default_factory=Counter)  # counts of the summarized value

    def merge(self, other: "BatchResult") -> "BatchResult":
        return BatchResult(self.protocol, self.trials + other.trials, self.accepted + other.accepted,
                           self.reasons + other.reasons, self.values + other.values)


def _one(protocol, strategies, config, master, index, summarize) -> BatchResult:
    outcome, _ = run_session(protocol, strategies, config, session_seed(master, index),
                             session_id=f"{protocol if isinstance(protocol, str) else protocol.name}-{index}")
    res = BatchResult(protocol if isinstance(protocol, str) else protocol.name, 1, int(outcome.accepted))
    res.reasons[outcome.reason or "ok"] += 1
    key = summarize(outcome) if summarize else None
    if key is not None:
        res.values[key] += 1
    return res


def run_batch(protocol: Protocol | str, strategies: dict | None = None, config: dict | None = None,
              trials: int = 100, parallelism: int = 1, master_seed: int = 0,
              summarize: Callable[[Outcome], object] | None = None) -> BatchResult:
    """Run ``trials`` sessions; the aggregate does not depend on ``parallelism``."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if parallelism < 1:
        raise ParameterError("parallelism must be at least 1")
    args = (protocol, strategies, config, master_seed)
    name = protocol if isinstance(protocol, str) else protocol.name
    total = BatchResult(name, 0, 0)
    if parallelism == 1:
        for i in range(trials):
            total = total.merge(_one(*args, i, summarize))
        return total
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        for part in pool.map(lambda i: _one(*args, i, summarize), range(trials)):
            total = total.merge(part)
    return total


def batch_reports(result: BatchResult, accept_bound: float | None = None, uniform_over: int | None = None
                  ) -> list[StatReport]:
    """Acceptance-rate and (optionally) uniformity reports for a batch."""
    out = []
    if accept_bound is not None:
        out.append(rate_lower(f"{result.protocol}.acceptance", result.accepted, result.trials, accept_bound))
    if uniform_over is not None:
        counts = [result.values.get(k, 0) for k in range(uniform_over)]
        out.append(chi_square_uniform(f"{result.protocol}.uniformity", counts))
    return out
