"""Trial-level simulation of the protocol and the classical collector.

Every period simulates each bin as an independent Bernoulli click with
the (+)/(-) pulse probability from `analytic`, so batch frequencies act
as an empirical oracle for the closed-form expressions rather than
re-deriving them.

Reproducibility contract: work is split into fixed-size chunks, each
chunk draws from its own PCG64 substream keyed by (seed, chunk index),
and reductions are exact integer sums. Results are therefore identical
across runs, thread counts, and kernel backends.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytic, kernels
from .model import ChannelParams, CouponInstance, PeriodOutcome

__all__ = [
    "BatchStats",
    "simulate_period",
    "run_batch",
    "classical_collector",
    "classical_collector_batch",
    "classical_success_within",
    "wilson_interval",
    "resolve_threads",
]

# bins x periods budget per chunk; fixed so chunking (and thus streams)
# never depends on thread count
_CHUNK_CELLS = 4_000_000
_MAX_CHUNK_PERIODS = 4096
_RUNS_PER_TASK = 256


def resolve_threads(requested: Optional[int] = None) -> int:
    """Worker count: requested (default 1), capped by QCC_THREADS if set."""
    threads = 1 if requested is None else max(1, int(requested))
    cap = os.environ.get("QCC_THREADS")
    if cap:
        threads = min(threads, max(1, int(cap)))
    return threads


@dataclass(frozen=True)
class BatchStats:
    """Counts from a batch of periods plus the derived frequencies."""

    periods: int
    accepted: int
    correct: int
    n: Optional[int] = None
    intensity: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0 <= self.correct <= self.accepted <= self.periods:
            raise ValueError(
                f"need correct <= accepted <= periods, got "
                f"{self.correct}/{self.accepted}/{self.periods}"
            )

    @property
    def efficiency_hat(self) -> float:
        return self.accepted / self.periods

    @property
    def correct_hat(self) -> float:
        """Conditional correct frequency; NaN when nothing was accepted."""
        if self.accepted == 0:
            return math.nan
        return self.correct / self.accepted

    @property
    def success_hat(self) -> float:
        return self.correct / self.periods

    @property
    def quantum_samples_hat(self) -> float:
        """Empirical photon cost n*I*N/correct; inf when correct == 0."""
        if self.n is None or self.intensity is None:
            raise ValueError("quantum_samples_hat needs n and intensity metadata")
        if self.correct == 0:
            return math.inf
        return self.n * self.intensity * self.periods / self.correct


def _substream(seed: int, index: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence([int(seed), int(index)]))


def _thresholds(instance: CouponInstance, params: ChannelParams, intensity: float):
    p_plus = analytic.click_prob_plus(params, intensity)
    p_minus = analytic.click_prob_minus(params, intensity)
    thresholds = np.full(instance.n, p_plus, dtype=np.float64)
    is_missing = np.zeros(instance.n, dtype=np.uint8)
    miss = np.array(instance.missing_sorted(), dtype=np.int64)
    thresholds[miss - 1] = p_minus
    is_missing[miss - 1] = 1
    return thresholds, is_missing


def simulate_period(
    rng: np.random.Generator,
    instance: CouponInstance,
    params: ChannelParams,
    intensity: float,
) -> PeriodOutcome:
    """One period: per-bin Bernoulli clicks, decoded by the exact-m rule."""
    thresholds, _ = _thresholds(instance, params, intensity)
    u = rng.random(instance.n)
    clicked = np.flatnonzero(u < thresholds) + 1
    return PeriodOutcome.from_clicks(instance, clicked.tolist())


def _chunk_periods(n: int) -> int:
    return max(1, min(_MAX_CHUNK_PERIODS, _CHUNK_CELLS // max(1, n)))


def run_batch(
    seed: int,
    instance: CouponInstance,
    params: ChannelParams,
    intensity: float,
    periods: int,
    threads: Optional[int] = None,
) -> BatchStats:
    """Aggregate `periods` simulated periods into acceptance/correct counts."""
    periods = int(periods)
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods}")
    thresholds, is_missing = _thresholds(instance, params, intensity)
    m = instance.m
    chunk = _chunk_periods(instance.n)
    n_chunks = (periods + chunk - 1) // chunk

    def job(chunk_index: int):
        count = min(chunk, periods - chunk_index * chunk)
        bg = _substream(seed, chunk_index)
        return kernels.period_chunk_counts(bg, thresholds, is_missing, m, count)

    workers = resolve_threads(threads)
    if workers == 1 or n_chunks == 1:
        results = [job(c) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(n_chunks)))
    accepted = sum(r[0] for r in results)
    correct = sum(r[1] for r in results)
    return BatchStats(
        periods=periods,
        accepted=accepted,
        correct=correct,
        n=instance.n,
        intensity=float(intensity),
    )


def classical_collector(seed: int, k: int) -> int:
    """Draws with replacement from k coupons until all have been seen."""
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return int(kernels.collector_run(_substream(seed, 0), k))


def classical_collector_batch(
    seed: int, k: int, runs: int, threads: Optional[int] = None
) -> np.ndarray:
    """Independent collector runs; run r uses substream (seed, r)."""
    k = int(k)
    runs = int(runs)
    if k < 1 or runs < 1:
        raise ValueError(f"need k >= 1 and runs >= 1, got k={k} runs={runs}")

    def task(start: int) -> np.ndarray:
        stop = min(start + _RUNS_PER_TASK, runs)
        out = np.empty(stop - start, dtype=np.int64)
        for r in range(start, stop):
            out[r - start] = kernels.collector_run(_substream(seed, r), k)
        return out

    starts = range(0, runs, _RUNS_PER_TASK)
    workers = resolve_threads(threads)
    if workers == 1 or len(starts) == 1:
        parts = [task(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, starts))
    return np.concatenate(parts)


def classical_success_within(
    seed: int, k: int, budget: int, runs: int, threads: Optional[int] = None
) -> float:
    """Fraction of collector runs completing within `budget` draws."""
    k = int(k)
    budget = int(budget)
    runs = int(runs)
    if budget < k:
        raise ValueError(f"budget {budget} cannot cover k={k} coupons")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")

    def task(start: int) -> int:
        stop = min(start + _RUNS_PER_TASK, runs)
        done = 0
        for r in range(start, stop):
            if kernels.collector_run(_substream(seed, r), k, budget) > 0:
                done += 1
        return done

    starts = range(0, runs, _RUNS_PER_TASK)
    workers = resolve_threads(threads)
    if workers == 1 or len(starts) == 1:
        total = sum(task(s) for s in starts)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(task, starts))
    return total / runs


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)
