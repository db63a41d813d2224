"""Exact reference for the projective-measurement coupon learner.

A measurement of one copy distinguishes the uniform superposition over
the whole universe from its orthogonal complement. The second outcome
occurs with probability m/n and leaves a state whose computational-basis
distribution weights each missing element with k/(n*m) and each present
element with m/(n*k). Sampling that two-stage process repeatedly until
every missing element has been observed gives the copy count of a
conservative learner that ignores first-outcome results.

Probabilities are exact rationals for n <= 10^4 and floats above.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Union

import numpy as np

from .model import CouponInstance

__all__ = [
    "IdealOutcomeDistribution",
    "IdealSampleStats",
    "ideal_distribution",
    "sample_ideal_measurements",
    "simulate_ideal_learning",
]

_EXACT_LIMIT = 10_000
_MAX_N = 10**6

Prob = Union[Fraction, float]


@dataclass(frozen=True)
class IdealOutcomeDistribution:
    """Second-outcome probability and the conditional index distribution."""

    p_outcome2: Prob
    per_index_conditional: Dict[int, Prob]


def ideal_distribution(instance: CouponInstance) -> IdealOutcomeDistribution:
    n, k, m = instance.n, instance.k, instance.m
    if n > _MAX_N:
        raise ValueError(f"n must be <= {_MAX_N}, got {n}")
    if n <= _EXACT_LIMIT:
        p2: Prob = Fraction(m, n)
        p_missing: Prob = Fraction(k, n * m)
        p_present: Prob = Fraction(m, n * k)
    else:
        p2 = m / n
        p_missing = k / (n * m)
        p_present = m / (n * k)
    cond: Dict[int, Prob] = {}
    missing = instance.complement()
    for i in range(1, n + 1):
        cond[i] = p_missing if i in missing else p_present
    return IdealOutcomeDistribution(p_outcome2=p2, per_index_conditional=cond)


@dataclass(frozen=True)
class IdealSampleStats:
    """Empirical counters from repeated single-copy measurements."""

    samples: int
    outcome2: int
    index_counts: Dict[int, int]

    @property
    def outcome2_freq(self) -> float:
        return self.outcome2 / self.samples

    def conditional_freq(self, index: int) -> float:
        if self.outcome2 == 0:
            raise ZeroDivisionError("no second-outcome samples observed")
        return self.index_counts.get(index, 0) / self.outcome2


def sample_ideal_measurements(
    seed: int, instance: CouponInstance, samples: int
) -> IdealSampleStats:
    """Measure `samples` independent copies; count outcomes and indices.

    Draws are vectorized: one uniform decides the outcome, a second (for
    second-outcome copies) picks the index through the block inverse CDF
    (missing block of mass k/n, present block of mass m/n).
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    n, k, m = instance.n, instance.k, instance.m
    missing = np.array(instance.missing_sorted(), dtype=np.int64)
    present = np.array(sorted(instance.s_members), dtype=np.int64)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    u_outcome = rng.random(samples)
    hit2 = u_outcome < (m / n)
    count2 = int(hit2.sum())
    u_index = rng.random(count2)

    miss_mass = k / n
    in_missing = u_index < miss_mass
    idx_missing = np.minimum((u_index[in_missing] / miss_mass * m).astype(np.int64), m - 1)
    u_present = (u_index[~in_missing] - miss_mass) / (m / n)
    idx_present = np.minimum((u_present * k).astype(np.int64), k - 1)

    counts: Dict[int, int] = {}
    for value, cnt in zip(*np.unique(missing[idx_missing], return_counts=True)):
        counts[int(value)] = int(cnt)
    for value, cnt in zip(*np.unique(present[idx_present], return_counts=True)):
        counts[int(value)] = counts.get(int(value), 0) + int(cnt)
    return IdealSampleStats(samples=samples, outcome2=count2, index_counts=counts)


def simulate_ideal_learning(seed: int, instance: CouponInstance) -> int:
    """Copies consumed until every missing element has been observed.

    First-outcome copies and present-element draws are spent but carry no
    information for this learner.
    """
    n, k, m = instance.n, instance.k, instance.m
    missing = instance.missing_sorted()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    p2 = m / n
    miss_mass = k / n
    seen = set()
    copies = 0
    while len(seen) < m:
        copies += 1
        if rng.random() >= p2:
            continue
        u = rng.random()
        if u < miss_mass:
            seen.add(missing[min(int(u / miss_mass * m), m - 1)])
    return copies
