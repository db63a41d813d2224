"""Pure-NumPy implementations of the hot sampling loops.

Selected automatically when the compiled extension is unavailable. Both
backends consume uniform doubles from the supplied bit generator in the
same order (period-major, bin-minor), so batch counts are bit-identical
across backends for a given seed.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# rows generated per RNG request inside one collector chunk
_COLLECTOR_CHUNK = 4096


def period_chunk_counts(bit_generator, thresholds, is_missing, m, count):
    """Simulate `count` periods of per-bin Bernoulli clicks.

    thresholds[j] is the click probability of bin j+1, is_missing[j] is 1
    for bins whose clicks are expected. Returns (accepted, correct) where
    accepted counts periods with exactly m clicks and correct those whose
    clicked set is exactly the missing set.
    """
    gen = np.random.Generator(bit_generator)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    miss = np.asarray(is_missing, dtype=bool)
    u = gen.random((int(count), thresholds.size))
    clicks = u < thresholds
    total = clicks.sum(axis=1)
    miss_hits = clicks[:, miss].sum(axis=1)
    accepted_mask = total == int(m)
    accepted = int(np.count_nonzero(accepted_mask))
    correct = int(np.count_nonzero(accepted_mask & (miss_hits == int(m))))
    return accepted, correct


def collector_run(bit_generator, k, max_draws=0):
    """Uniform draws with replacement until all k coupons are seen.

    Returns the number of draws, or -1 when `max_draws` > 0 and the
    collection is still incomplete at that budget. Draws map a uniform
    double to a coupon id via floor(u * k).
    """
    k = int(k)
    gen = np.random.Generator(bit_generator)
    budget = int(max_draws) if max_draws and int(max_draws) > 0 else None
    seen = np.zeros(k, dtype=bool)
    found = 0
    base = 0
    while True:
        size = _COLLECTOR_CHUNK if budget is None else min(_COLLECTOR_CHUNK, budget - base)
        if budget is not None and size <= 0:
            return -1
        ids = np.minimum((gen.random(size) * k).astype(np.int64), k - 1)
        uniq, first = np.unique(ids, return_index=True)
        new_mask = ~seen[uniq]
        n_new = int(np.count_nonzero(new_mask))
        if found + n_new >= k:
            firsts = np.sort(first[new_mask])
            done_at = base + int(firsts[k - found - 1]) + 1
            if budget is not None and done_at > budget:
                return -1
            return done_at
        seen[uniq[new_mask]] = True
        found += n_new
        base += size
