"""Closed-form statistics of the coherent-state coupon collector protocol.

Per-pulse click probabilities for in-set (+) and out-of-set (-) phase
pulses, the acceptance probability of a period (exactly m clicks among
the n pulses), the conditional correct probability, the success
probability, the expected quantum sample cost, and the two classical
baselines.

All powers and binomial terms are evaluated in log space so the formulas
stay usable for set sizes up to 10^6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateEfficiencyError, ZeroSuccessError
from .model import ChannelParams

__all__ = [
    "ProtocolStats",
    "click_prob_plus",
    "click_prob_minus",
    "ideal_nonclick",
    "ideal_success",
    "acceptance_from_click_probs",
    "efficiency",
    "correct_prob",
    "correct_prob_m1",
    "success_prob",
    "quantum_samples",
    "classical_limit",
    "classical_expected",
    "harmonic",
    "protocol_stats",
]


def _check_intensity(intensity: float) -> float:
    intensity = float(intensity)
    if intensity < 0.0 or not math.isfinite(intensity):
        raise ValueError(f"intensity must be >= 0, got {intensity!r}")
    return intensity


def click_prob_plus(params: ChannelParams, intensity: float) -> float:
    """Click probability on an in-set (+) pulse.

    Interference cancels the pulse up to the visibility deficit, so only
    the leaked fraction and dark counts can fire the detector. The
    additive dark term can push the first-order model above 1 for extreme
    inputs; the result is clamped to [0, 1] by definition.
    """
    intensity = _check_intensity(intensity)
    x = 2.0 * (1.0 - params.visibility) * intensity * params.eta
    return min(1.0, -math.expm1(-x) + params.dark_rate)


def click_prob_minus(params: ChannelParams, intensity: float) -> float:
    """Click probability on an out-of-set (-) pulse (constructive port)."""
    intensity = _check_intensity(intensity)
    x = 2.0 * intensity * params.eta
    return min(1.0, -math.expm1(-x) + params.dark_rate)


def ideal_nonclick(intensity: float) -> float:
    """No-click probability of a (-) pulse with perfect hardware: e^(-2I)."""
    return math.exp(-2.0 * _check_intensity(intensity))


def ideal_success(intensity: float, m: int) -> float:
    """Probability that all m missing elements click with perfect hardware."""
    m = int(m)
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    intensity = _check_intensity(intensity)
    if m == 0:
        return 1.0
    p = -math.expm1(-2.0 * intensity)
    if p == 0.0:
        return 0.0
    return math.exp(m * math.log(p))


def _log_binom_pmf(count: int, hits: np.ndarray, p: float) -> np.ndarray:
    """log of C(count, hits) p^hits (1-p)^(count-hits), elementwise.

    p == 0 and p == 1 are handled exactly (point masses) so callers can
    feed clamped probabilities without raising on log(0).
    """
    hits = np.asarray(hits, dtype=np.float64)
    if p <= 0.0:
        return np.where(hits == 0, 0.0, -np.inf)
    if p >= 1.0:
        return np.where(hits == count, 0.0, -np.inf)
    log_comb = gammaln(count + 1) - gammaln(hits + 1) - gammaln(count - hits + 1)
    return log_comb + hits * math.log(p) + (count - hits) * math.log1p(-p)


# below this the zero-hit anchor of the pmf recurrence underflows and the
# gammaln path takes over
_ANCHOR_FLOOR = -700.0


def _binom_pmf_row(count: int, max_hits: int, p: float):
    """D(count, h, p) for h = 0..max_hits via the multiplicative recurrence.

    Far more accurate than exponentiating gammaln sums (a few ulps per
    step instead of the absolute error of huge log terms). Returns None
    when the zero-hit anchor underflows; callers then use log space.
    """
    row = np.zeros(max_hits + 1)
    if p <= 0.0:
        row[0] = 1.0
        return row
    if p >= 1.0:
        if count <= max_hits:
            row[count] = 1.0
        return row
    log_anchor = count * math.log1p(-p)
    if log_anchor < _ANCHOR_FLOOR:
        return None
    top = min(max_hits, count)
    j = np.arange(1.0, top + 1.0)
    ratios = (count - j + 1.0) / j * (p / (1.0 - p))
    row[0] = math.exp(log_anchor)
    if top >= 1:
        row[1 : top + 1] = row[0] * np.cumprod(ratios)
    return row


def _exactly_m_clicks(p_plus: float, p_minus: float, m: int, k: int) -> float:
    """Probability that the m (-) pulses and k (+) pulses click m times in
    total: convolution of the two binomial count distributions at m."""
    row_minus = _binom_pmf_row(m, m, p_minus)
    row_plus = _binom_pmf_row(k, m, p_plus)
    if row_minus is not None and row_plus is not None:
        total = float(np.dot(row_minus, row_plus[::-1]))
        return min(1.0, total)
    i_lo = max(0, m - k)
    i = np.arange(i_lo, m + 1)
    log_terms = _log_binom_pmf(m, i, p_minus) + _log_binom_pmf(k, m - i, p_plus)
    finite = log_terms[np.isfinite(log_terms)]
    if finite.size == 0:
        return 0.0
    peak = float(np.max(finite))
    total = peak + math.log(float(np.sum(np.exp(finite - peak))))
    return float(min(1.0, math.exp(total)))


def acceptance_from_click_probs(p_plus: float, p_minus: float, m: int, k: int) -> float:
    """Acceptance probability directly from the two per-pulse click
    probabilities; used when those are estimated rather than derived from
    channel parameters."""
    m, k = int(m), int(k)
    if m <= 0 or k <= 0:
        raise ValueError(f"m and k must be >= 1, got m={m} k={k}")
    return _exactly_m_clicks(float(p_plus), float(p_minus), m, k)


def efficiency(params: ChannelParams, intensity: float, m: int, k: int) -> float:
    """Probability that a period is accepted: exactly m clicks among m+k pulses."""
    m, k = int(m), int(k)
    if m <= 0 or k <= 0:
        raise ValueError(f"m and k must be >= 1, got m={m} k={k}")
    p_plus = click_prob_plus(params, intensity)
    p_minus = click_prob_minus(params, intensity)
    return _exactly_m_clicks(p_plus, p_minus, m, k)


def _log_success(p_plus: float, p_minus: float, m: int, k: int) -> float:
    """log of P_minus^m (1-P_plus)^k, -inf when the product is zero."""
    if p_minus == 0.0 or p_plus >= 1.0:
        return -math.inf
    return m * math.log(p_minus) + k * math.log1p(-p_plus)


def success_prob(params: ChannelParams, intensity: float, m: int, k: int) -> float:
    """Probability that a period is accepted and decodes the set exactly.

    Closed form: all m (-) pulses click and none of the k (+) pulses do.
    Identical to efficiency * correct_prob by construction.
    """
    m, k = int(m), int(k)
    if m <= 0 or k <= 0:
        raise ValueError(f"m and k must be >= 1, got m={m} k={k}")
    p_plus = click_prob_plus(params, intensity)
    p_minus = click_prob_minus(params, intensity)
    log_s = _log_success(p_plus, p_minus, m, k)
    return 0.0 if log_s == -math.inf else math.exp(log_s)


def correct_prob(params: ChannelParams, intensity: float, m: int, k: int) -> float:
    """Conditional probability that an accepted period names the set exactly."""
    eff = efficiency(params, intensity, m, k)
    if eff <= 0.0:
        raise DegenerateEfficiencyError(
            f"acceptance probability underflowed to 0 at intensity {intensity!r}"
        )
    p_plus = click_prob_plus(params, intensity)
    p_minus = click_prob_minus(params, intensity)
    if p_plus == 0.0:
        # no false clicks possible: every accepted period is correct
        return 1.0
    log_s = _log_success(p_plus, p_minus, m, k)
    if log_s == -math.inf:
        return 0.0
    return min(1.0, math.exp(log_s) / eff)


def correct_prob_m1(params: ChannelParams, intensity: float, n: int) -> float:
    """Single-missing-element correct probability in its reduced two-term form.

    Algebraically identical to correct_prob(m=1, k=n-1); kept as an
    independent expression so the identity can be asserted in tests.
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    p_plus = click_prob_plus(params, intensity)
    p_minus = click_prob_minus(params, intensity)
    k = n - 1
    # single accepted-click split: the click came from the (-) pulse, or
    # from exactly one of the k (+) pulses while the (-) pulse stayed dark
    if p_plus >= 1.0:
        term_good = 0.0
        term_false = 0.0 if k > 1 else (1.0 - p_minus)
    else:
        log_k_none = k * math.log1p(-p_plus)
        term_good = 0.0 if p_minus == 0.0 else math.exp(math.log(p_minus) + log_k_none)
        log_k_one = (
            math.log(k) + math.log(p_plus) + (k - 1) * math.log1p(-p_plus)
            if p_plus > 0.0
            else -math.inf
        )
        term_false = (
            0.0
            if (log_k_one == -math.inf or p_minus >= 1.0)
            else math.exp(math.log1p(-p_minus) + log_k_one)
        )
    denom = term_good + term_false
    if denom <= 0.0:
        raise DegenerateEfficiencyError(
            f"acceptance probability underflowed to 0 at intensity {intensity!r}"
        )
    return min(1.0, term_good / denom)


def quantum_samples(params: ChannelParams, intensity: float, n: int, m: int) -> float:
    """Expected photon cost to learn the set once: n * intensity / success."""
    n, m = int(n), int(m)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
    s = success_prob(params, intensity, m, n - m)
    if s <= 0.0:
        raise ZeroSuccessError(
            f"success probability underflowed to 0 at intensity {intensity!r}"
        )
    return n * float(intensity) / s


def classical_limit(k: int) -> float:
    """Classical sample bound k*ln(k); returns 0 for the degenerate k=1."""
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return k * math.log(k)


def harmonic(k: int) -> float:
    """k-th harmonic number by direct exactly-rounded summation."""
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return math.fsum(1.0 / i for i in range(1, k + 1))


def classical_expected(k: int) -> float:
    """Expected classical draws to see all k coupons: k * H_k."""
    return int(k) * harmonic(k)


@dataclass(frozen=True)
class ProtocolStats:
    """Bundle of the per-operating-point statistics."""

    p_click_plus: float
    p_click_minus: float
    efficiency: float
    correct_prob: float
    success_prob: float
    quantum_samples: float


def protocol_stats(
    params: ChannelParams, intensity: float, n: int, m: int
) -> ProtocolStats:
    """Evaluate all protocol statistics at one operating point."""
    n, m = int(n), int(m)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
    k = n - m
    eff = efficiency(params, intensity, m, k)
    suc = success_prob(params, intensity, m, k)
    corr = correct_prob(params, intensity, m, k)
    if suc <= 0.0:
        raise ZeroSuccessError(
            f"success probability underflowed to 0 at intensity {intensity!r}"
        )
    return ProtocolStats(
        p_click_plus=click_prob_plus(params, intensity),
        p_click_minus=click_prob_minus(params, intensity),
        efficiency=eff,
        correct_prob=corr,
        success_prob=suc,
        quantum_samples=n * float(intensity) / suc,
    )
