"""Time-tagged detection-event processing.

Covers the full experimental data path: ingestion of per-event records
(period, bin, arrival offset), time-window filtering with the exact-m
decode rule, inversion of the observed frequencies back to effective
channel parameters, summary-table reconstruction, and a synthetic event
generator that stands in for raw detector data. The generator plants
phase-modulation leakage at configurable offsets inside the bin, so
narrowing the counting window trades detected events for effective
visibility exactly as window selection does on hardware.

Default bin duration is 900 ps; period ids are 0-based, bin indices
1-based.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from . import analytic
from .errors import DegenerateCountsError, InfeasibleConstraintError
from .model import ChannelParams, CouponInstance
from .montecarlo import BatchStats

__all__ = [
    "BIN_DURATION_PS",
    "EventRecord",
    "TimeWindow",
    "LeakageProfile",
    "TableRow",
    "ingest",
    "export",
    "apply_window",
    "estimate_effective_params",
    "window_search",
    "table_report",
    "load_counts",
    "generate_synthetic",
    "printed_percent",
    "printed_3sf",
]

BIN_DURATION_PS = 900.0

_HEADER = ("period_id", "bin_index", "offset_ps")


@dataclass(frozen=True)
class EventRecord:
    """One detector click: which period, which bin, arrival offset."""

    period_id: int
    bin_index: int
    offset_ps: float


@dataclass(frozen=True)
class TimeWindow:
    """Counting window inside a bin, [start_ps, end_ps)."""

    start_ps: float
    end_ps: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.start_ps < self.end_ps):
            raise ValueError(
                f"need 0 <= start < end, got [{self.start_ps}, {self.end_ps})"
            )

    @property
    def width(self) -> float:
        return self.end_ps - self.start_ps


@dataclass(frozen=True)
class LeakageProfile:
    """Where in-bin false clicks from imperfect phase modulation land.

    leak_prob is the per-period probability that an in-set bin fires a
    leakage click; `segments` is a piecewise-constant density over the
    bin given as (start_ps, end_ps, weight) pieces. An empty tuple means
    uniform over the whole bin.
    """

    leak_prob: float = 0.0
    segments: Tuple[Tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.leak_prob <= 1.0:
            raise ValueError(f"leak_prob must lie in [0, 1], got {self.leak_prob}")
        for start, end, weight in self.segments:
            if not (0.0 <= start < end):
                raise ValueError(f"bad segment bounds ({start}, {end})")
            if weight < 0.0:
                raise ValueError(f"segment weight must be >= 0, got {weight}")
        if self.segments and sum(w for _, _, w in self.segments) <= 0.0:
            raise ValueError("segment weights must not all be zero")

    def window_mass(self, window: TimeWindow, bin_duration: float) -> float:
        """Fraction of the leakage density inside `window`."""
        if not self.segments:
            lo = max(window.start_ps, 0.0)
            hi = min(window.end_ps, bin_duration)
            return max(0.0, hi - lo) / bin_duration
        total = sum(w for _, _, w in self.segments)
        inside = 0.0
        for start, end, weight in self.segments:
            overlap = max(0.0, min(end, window.end_ps) - max(start, window.start_ps))
            inside += weight * overlap / (end - start)
        return inside / total


def _parse_line(lineno: int, row: Sequence[str], n: Optional[int], bin_duration: float):
    if len(row) != 3:
        raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
    try:
        period = int(row[0])
        bin_index = int(row[1])
        offset = float(row[2])
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from None
    if period < 0:
        raise ValueError(f"line {lineno}: period_id must be >= 0, got {period}")
    if bin_index < 1 or (n is not None and bin_index > n):
        raise ValueError(f"line {lineno}: bin_index {bin_index} out of range")
    if not 0.0 <= offset < bin_duration:
        raise ValueError(
            f"line {lineno}: offset_ps {offset} outside [0, {bin_duration})"
        )
    return EventRecord(period, bin_index, offset)


def ingest(
    source: Union[str, Path, io.TextIOBase],
    n: Optional[int] = None,
    bin_duration: float = BIN_DURATION_PS,
) -> List[EventRecord]:
    """Read and validate an event CSV; records come back in canonical
    (period, bin, offset) order."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return ingest(handle, n=n, bin_duration=bin_duration)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        return []
    if tuple(h.strip() for h in header) != _HEADER:
        raise ValueError(f"line 1: expected header {','.join(_HEADER)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        records.append(_parse_line(lineno, row, n, bin_duration))
    records.sort(key=lambda e: (e.period_id, e.bin_index, e.offset_ps))
    return records


def export(events: Iterable[EventRecord], target: Union[str, Path, io.TextIOBase]) -> None:
    """Write records as canonical CSV: sorted, LF endings, 3-decimal offsets."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as handle:
            export(events, handle)
        return
    target.write(",".join(_HEADER) + "\n")
    for e in sorted(events, key=lambda e: (e.period_id, e.bin_index, e.offset_ps)):
        target.write(f"{e.period_id},{e.bin_index},{e.offset_ps:.3f}\n")


def _event_arrays(events: Sequence[EventRecord]):
    periods = np.fromiter((e.period_id for e in events), dtype=np.int64, count=len(events))
    bins = np.fromiter((e.bin_index for e in events), dtype=np.int64, count=len(events))
    offsets = np.fromiter((e.offset_ps for e in events), dtype=np.float64, count=len(events))
    return periods, bins, offsets


def apply_window(
    events: Sequence[EventRecord],
    window: TimeWindow,
    n: int,
    missing: Iterable[int],
    periods: Optional[int] = None,
    intensity: Optional[float] = None,
    bin_duration: float = BIN_DURATION_PS,
) -> BatchStats:
    """Drop events outside the window, rebuild per-period click sets and
    decode with the exact-m rule.

    `missing` is the ground-truth missing set used to judge correctness;
    `periods` is the total period count of the run (periods with no
    surviving events still count toward the denominator). When omitted it
    is inferred as max(period_id) + 1.
    """
    if window.end_ps > bin_duration:
        raise ValueError(f"window end {window.end_ps} exceeds bin duration {bin_duration}")
    n = int(n)
    miss = frozenset(int(b) for b in missing)
    if not miss or min(miss) < 1 or max(miss) > n:
        raise ValueError("missing set must be nonempty within 1..n")
    m = len(miss)
    per, bins, offs = _event_arrays(events)
    if periods is None:
        periods = int(per.max()) + 1 if per.size else 0
    periods = int(periods)
    if periods < 1:
        raise ValueError("total period count must be >= 1")

    keep = (offs >= window.start_ps) & (offs < window.end_ps)
    key = per[keep] * (n + 1) + bins[keep]
    uniq_key = np.unique(key)
    pid = uniq_key // (n + 1)
    clicked_bin = uniq_key % (n + 1)

    all_pids, total_counts = np.unique(pid, return_counts=True)
    miss_arr = np.fromiter(sorted(miss), dtype=np.int64, count=m)
    in_miss = np.isin(clicked_bin, miss_arr)
    miss_pids, miss_counts = np.unique(pid[in_miss], return_counts=True)

    accepted_pids = all_pids[total_counts == m]
    accepted = int(accepted_pids.size)
    if accepted and miss_pids.size:
        pos = np.searchsorted(miss_pids, accepted_pids)
        pos_clipped = np.minimum(pos, miss_pids.size - 1)
        hit = (pos < miss_pids.size) & (miss_pids[pos_clipped] == accepted_pids)
        mc = np.where(hit, miss_counts[pos_clipped], 0)
        correct = int(np.count_nonzero(mc == m))
    else:
        correct = 0
    return BatchStats(
        periods=periods,
        accepted=accepted,
        correct=correct,
        n=n,
        intensity=None if intensity is None else float(intensity),
    )


def estimate_effective_params(
    stats: BatchStats,
    intensity: float,
    n: int,
    m: int,
    dark_rate: float = 0.0,
) -> Tuple[float, float]:
    """Invert observed (efficiency, success) frequencies to (visibility,
    transmittance), with the dark rate treated as known.

    The success frequency pins the (-)-pulse click probability once the
    (+)-pulse one is fixed, so the acceptance equation reduces to one
    unknown and is solved by bracketed root finding. Boundary cases (no
    false clicks observed) report visibility 1.
    """
    n, m = int(n), int(m)
    k = n - m
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
    intensity = float(intensity)
    if intensity <= 0.0:
        raise ValueError("intensity must be > 0 for inversion")
    if stats.accepted == 0 or stats.correct == 0:
        raise DegenerateCountsError("no accepted/correct periods: inversion impossible")
    s_hat = stats.success_hat
    e_hat = stats.efficiency_hat

    def p_minus_of(p_plus: float) -> float:
        return min(1.0, (s_hat / math.exp(k * math.log1p(-p_plus))) ** (1.0 / m))

    def gap(p_plus: float) -> float:
        return analytic.acceptance_from_click_probs(p_plus, p_minus_of(p_plus), m, k) - e_hat

    p_plus_cap = 1.0 - s_hat ** (1.0 / k)  # beyond this the success equation needs p_minus > 1
    if gap(0.0) >= 0.0:
        p_plus = 0.0
    else:
        hi = None
        for candidate in np.geomspace(max(p_plus_cap * 1e-9, 1e-15), p_plus_cap * 0.999999, 200):
            if gap(float(candidate)) >= 0.0:
                hi = float(candidate)
                break
        if hi is None:
            raise DegenerateCountsError(
                "observed efficiency is inconsistent with the observed success rate"
            )
        p_plus = float(brentq(gap, 0.0, hi, xtol=1e-16, rtol=1e-14))
    p_minus = p_minus_of(p_plus)

    signal = p_minus - dark_rate
    if signal <= 0.0:
        raise DegenerateCountsError("success rate is below the dark-count floor")
    eta = min(1.0, -math.log1p(-min(signal, 1.0 - 1e-15)) / (2.0 * intensity))
    false_rate = p_plus - dark_rate
    if false_rate <= 0.0 or eta <= 0.0:
        nu = 1.0
    else:
        nu = 1.0 - (-math.log1p(-min(false_rate, 1.0 - 1e-15))) / (2.0 * intensity * eta)
    return min(1.0, max(0.0, nu)), eta


def window_search(
    events: Sequence[EventRecord],
    n: int,
    missing: Iterable[int],
    intensity: float,
    constraint: float = 0.9,
    grid_step: float = 30.0,
    periods: Optional[int] = None,
    bin_duration: float = BIN_DURATION_PS,
) -> Tuple[TimeWindow, float]:
    """Exhaustive traversal of start/end windows on a fixed grid.

    Returns the window minimizing the estimated sample cost n*I/success
    among windows whose correct frequency meets the constraint. Ties go
    to the wider window, then the earlier start.
    """
    if not events:
        raise ValueError("event list is empty")
    if not 0.0 < grid_step <= bin_duration:
        raise ValueError(f"grid_step must lie in (0, {bin_duration}], got {grid_step}")
    edges = [round(i * grid_step, 9) for i in range(int(bin_duration // grid_step) + 1)]
    if edges[-1] < bin_duration:
        edges.append(bin_duration)
    n = int(n)
    intensity = float(intensity)
    best: Optional[Tuple[float, float, float, TimeWindow]] = None
    for i, start in enumerate(edges[:-1]):
        for end in edges[i + 1 :]:
            window = TimeWindow(start, end)
            stats = apply_window(
                events, window, n, missing, periods=periods, bin_duration=bin_duration
            )
            if stats.correct == 0:
                continue
            if stats.correct_hat < constraint:
                continue
            cost = n * intensity / stats.success_hat
            rank = (cost, -window.width, window.start_ps)
            if best is None or rank < (best[0], best[1], best[2]):
                best = (cost, -window.width, window.start_ps, window)
    if best is None:
        raise InfeasibleConstraintError(
            f"no window reaches correct >= {constraint}"
        )
    return best[3], best[0]


@dataclass(frozen=True)
class TableRow:
    """Derived summary columns for one single-missing-element run."""

    input_size: int
    per_pulse_intensity: float
    total_coupons: int
    detection_events: Optional[int]
    single_clicks: int
    correct_clicks: int
    correct_prob: float
    efficiency: float
    success_prob: float
    classical_samples: float
    quantum_samples: float


def table_report(
    entries: Sequence[Tuple[BatchStats, Optional[int]]]
) -> List[TableRow]:
    """Derive the summary columns for a list of runs.

    Each entry is (stats, detection_events); stats must carry n and
    intensity metadata. Zero correct clicks yield an infinite quantum
    sample count rather than an error.
    """
    rows = []
    for stats, detection_events in entries:
        if stats.n is None or stats.intensity is None:
            raise ValueError("table rows need n and intensity metadata")
        length, mu = stats.n, stats.intensity
        quantum = (
            math.inf
            if stats.correct == 0
            else length * mu / stats.success_hat
        )
        rows.append(
            TableRow(
                input_size=length,
                per_pulse_intensity=mu,
                total_coupons=stats.periods,
                detection_events=detection_events,
                single_clicks=stats.accepted,
                correct_clicks=stats.correct,
                correct_prob=stats.correct_hat,
                efficiency=stats.efficiency_hat,
                success_prob=stats.success_hat,
                classical_samples=analytic.classical_limit(length - 1),
                quantum_samples=quantum,
            )
        )
    return rows


def load_counts(source: Union[str, Path, io.TextIOBase]) -> List[Tuple[BatchStats, Optional[int]]]:
    """Read a raw-count CSV (L, mu, totals and click counts) into stats."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_counts(handle)
    reader = csv.DictReader(source)
    required = {"L", "mu", "total_coupons", "single_clicks", "correct_clicks"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError(f"counts file must provide columns {sorted(required)}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        try:
            stats = BatchStats(
                periods=int(row["total_coupons"]),
                accepted=int(row["single_clicks"]),
                correct=int(row["correct_clicks"]),
                n=int(row["L"]),
                intensity=float(row["mu"]),
            )
            detection = (
                int(row["detection_events"])
                if row.get("detection_events") not in (None, "")
                else None
            )
        except (ValueError, KeyError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        entries.append((stats, detection))
    return entries


def printed_percent(x: float) -> str:
    """Percentage at 1 decimal, the precision used in summary tables."""
    return f"{100.0 * x:.1f}"


def printed_3sf(x: float) -> str:
    """Three significant figures, exponential for large counts."""
    if math.isinf(x):
        return "inf"
    return f"{x:.3g}"


def _floor_3(values: np.ndarray) -> np.ndarray:
    return np.floor(values * 1000.0) / 1000.0


def generate_synthetic(
    seed: int,
    instance: CouponInstance,
    params: ChannelParams,
    intensity: float,
    periods: int,
    profile: Optional[LeakageProfile] = None,
    bin_duration: float = BIN_DURATION_PS,
) -> List[EventRecord]:
    """Simulate time-tagged clicks whose windowed statistics reproduce the
    per-pulse click model with a window-dependent effective visibility.

    Four independent click sources are drawn per period: interference
    signal on missing bins and beam-splitter leakage on in-set bins (both
    uniform in the bin), phase-modulation leakage on in-set bins placed
    by the profile density, and dark counts on every bin. A bin can carry
    more than one event. Offsets are truncated to 3 decimals so exported
    files are canonical.
    """
    periods = int(periods)
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods}")
    intensity = float(intensity)
    if intensity < 0.0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    profile = profile or LeakageProfile()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))

    miss_bins = np.array(instance.missing_sorted(), dtype=np.int64)
    in_bins = np.array(sorted(instance.s_members), dtype=np.int64)
    q_signal = -math.expm1(-2.0 * intensity * params.eta)
    q_bs = -math.expm1(-2.0 * (1.0 - params.visibility) * intensity * params.eta)

    out_periods: List[np.ndarray] = []
    out_bins: List[np.ndarray] = []
    out_offsets: List[np.ndarray] = []

    def emit_uniform(bin_ids: np.ndarray, prob: float) -> None:
        if prob <= 0.0 or bin_ids.size == 0:
            return
        fires = rng.random((periods, bin_ids.size)) < prob
        pid, col = np.nonzero(fires)
        out_periods.append(pid)
        out_bins.append(bin_ids[col])
        out_offsets.append(_floor_3(rng.random(pid.size) * bin_duration))

    def emit_profile(bin_ids: np.ndarray, prob: float) -> None:
        if prob <= 0.0 or bin_ids.size == 0:
            return
        fires = rng.random((periods, bin_ids.size)) < prob
        pid, col = np.nonzero(fires)
        count = pid.size
        if not profile.segments:
            offsets = rng.random(count) * bin_duration
        else:
            weights = np.array([w for _, _, w in profile.segments], dtype=np.float64)
            cdf = np.cumsum(weights) / weights.sum()
            seg = np.searchsorted(cdf, rng.random(count), side="right")
            seg = np.minimum(seg, len(profile.segments) - 1)
            starts = np.array([s for s, _, _ in profile.segments])[seg]
            widths = np.array([e - s for s, e, _ in profile.segments])[seg]
            offsets = starts + rng.random(count) * widths
        out_periods.append(pid)
        out_bins.append(bin_ids[col])
        out_offsets.append(_floor_3(offsets))

    emit_uniform(miss_bins, q_signal)
    emit_uniform(in_bins, q_bs)
    emit_profile(in_bins, profile.leak_prob)
    emit_uniform(np.arange(1, instance.n + 1, dtype=np.int64), params.dark_rate)

    if not out_periods:
        return []
    per = np.concatenate(out_periods)
    bins = np.concatenate(out_bins)
    offs = np.concatenate(out_offsets)
    order = np.lexsort((offs, bins, per))
    return [
        EventRecord(int(per[j]), int(bins[j]), float(offs[j])) for j in order
    ]
