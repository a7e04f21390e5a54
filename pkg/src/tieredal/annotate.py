"""Simulated annotator, the verify-vs-correct cost model, timing-ratio
statistics, and the labeling-efficiency metric.

Accounting cost (deterministic c_a/c_v arithmetic) is kept separate from the
measured per-item elapsed time, which carries multiplicative log-normal noise.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, UnreachableTargetError

MODE_PERFECT = "perfect"
MODE_NOISY = "noisy"
MODE_BERNOULLI = "bernoulli_suggestion"


@dataclass
class OracleConfig:
    mode: str = MODE_PERFECT
    epsilon: float = 0.0  # wrong-final-label probability in noisy mode
    q: float = 0.5  # suggestion-correct probability in bernoulli mode
    c_a: float = 3.0
    c_v: float = 1.0
    timing_noise: float = 0.0  # log-normal sigma on elapsed
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in (MODE_PERFECT, MODE_NOISY, MODE_BERNOULLI):
            raise InvalidArgumentError(f"unknown oracle mode {self.mode!r}")
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidArgumentError("epsilon must be in [0, 1)")
        if not 0.0 <= self.q <= 1.0:
            raise InvalidArgumentError("q must be in [0, 1]")
        if self.c_v <= 0 or self.c_a <= 0:
            raise InvalidArgumentError("costs must be positive")
        if self.timing_noise < 0:
            raise InvalidArgumentError("timing_noise must be non-negative")
        if self.c_a < self.c_v:
            warnings.warn("c_a < c_v: correcting cheaper than verifying is "
                          "atypical for human annotators", stacklevel=2)


@dataclass
class TimingRecord:
    item: int
    suggestion_correct: bool
    final_label: int
    elapsed: float
    discarded: bool = False  # final label disagreed with ground truth


@dataclass
class RatioStats:
    mean_cv: float
    median_cv: float
    mean_ca: float
    median_ca: float

    @property
    def mean_ratio(self) -> float:
        return self.mean_ca / self.mean_cv

    @property
    def median_ratio(self) -> float:
        return self.median_ca / self.median_cv


def _wrong_class(truth: int, num_classes: int, rng) -> int:
    wrong = int(rng.integers(num_classes - 1))
    return wrong + 1 if wrong >= truth else wrong


def oracle_annotate(item: int, suggestion: int, truth: int, cfg: OracleConfig,
                    rng: np.random.Generator,
                    num_classes: int | None = None) -> TimingRecord:
    """Simulate one annotation.

    perfect: final label is the truth. noisy: final label flips to a uniform
    wrong class with probability epsilon. bernoulli_suggestion: the given
    suggestion is replaced by the truth with probability q, else by a uniform
    wrong class (the timing-experiment generator); the final label is the truth.
    """
    if num_classes is None:
        num_classes = max(suggestion, truth) + 2
    if cfg.mode == MODE_BERNOULLI:
        if rng.random() < cfg.q:
            suggestion = truth
        else:
            suggestion = _wrong_class(truth, num_classes, rng)
    correct = suggestion == truth
    final = truth
    if cfg.mode == MODE_NOISY and rng.random() < cfg.epsilon:
        final = _wrong_class(truth, num_classes, rng)
    base = cfg.c_v if correct else cfg.c_a
    noise = np.exp(cfg.timing_noise * rng.standard_normal()) if cfg.timing_noise else 1.0
    return TimingRecord(
        item=item,
        suggestion_correct=correct,
        final_label=final,
        elapsed=float(base * noise),
        discarded=final != truth,
    )


def labeling_cost(records, c_a: float, c_v: float) -> float:
    """Accounting cost c_v * n_correct + c_a * (n - n_correct).

    Deterministic in the suggestion-correct flags: timing noise never enters.
    Discarded records are excluded.
    """
    kept = [r for r in records if not r.discarded]
    n_correct = sum(r.suggestion_correct for r in kept)
    return c_v * n_correct + c_a * (len(kept) - n_correct)


def ratio_stats(records) -> RatioStats:
    """Mean/median elapsed split by suggestion correctness (non-discarded only)."""
    kept = [r for r in records if not r.discarded]
    cv_times = [r.elapsed for r in kept if r.suggestion_correct]
    ca_times = [r.elapsed for r in kept if not r.suggestion_correct]
    if not cv_times or not ca_times:
        raise InsufficientDataError(
            "need at least one correct-suggestion and one incorrect-suggestion record"
        )
    return RatioStats(
        mean_cv=float(np.mean(cv_times)),
        median_cv=float(np.median(cv_times)),
        mean_ca=float(np.mean(ca_times)),
        median_ca=float(np.median(ca_times)),
    )


def _cost_to_reach(curve, target_acc: float):
    """Smallest cost at which the piecewise-linear curve reaches target_acc."""
    costs = np.asarray([p[0] for p in curve], dtype=np.float64)
    accs = np.asarray([p[1] for p in curve], dtype=np.float64)
    if np.any(np.diff(costs) < 0):
        raise InvalidArgumentError("curve costs must be nondecreasing")
    if accs[0] >= target_acc:
        return float(costs[0])
    for i in range(1, len(costs)):
        if accs[i] >= target_acc:
            lo, hi = accs[i - 1], accs[i]
            if hi == lo:
                return float(costs[i])
            frac = (target_acc - lo) / (hi - lo)
            return float(costs[i - 1] + frac * (costs[i] - costs[i - 1]))
    return None


def labeling_efficiency(curve_a, curve_b, target_acc: float) -> float:
    """cost_b(target) / cost_a(target); > 1 means method a is cheaper."""
    cost_a = _cost_to_reach(curve_a, target_acc)
    if cost_a is None:
        raise UnreachableTargetError(
            f"target accuracy {target_acc} not reached", curve="a"
        )
    cost_b = _cost_to_reach(curve_b, target_acc)
    if cost_b is None:
        raise UnreachableTargetError(
            f"target accuracy {target_acc} not reached", curve="b"
        )
    return cost_b / cost_a


def records_to_csv(records, path: str) -> None:
    """Export columns item,correct,final_label,elapsed,discarded."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item", "correct", "final_label", "elapsed", "discarded"])
        for r in records:
            writer.writerow([r.item, int(r.suggestion_correct), r.final_label,
                             repr(r.elapsed), int(r.discarded)])
