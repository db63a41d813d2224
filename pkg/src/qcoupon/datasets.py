"""Packaged reference datasets.

`table1_counts` holds the raw counts of the nine single-missing-element
runs (input sizes 2000..18000); `blindbox_runs` the per-(m, intensity)
click counts of the n=100 blind-box runs, each spanning 500000 periods
(5 s at a 10 MHz repetition rate, 100 bins per period).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import List, Optional, Tuple

from .montecarlo import BatchStats

__all__ = ["BlindboxRun", "table1_counts", "blindbox_runs", "BLINDBOX_N"]

BLINDBOX_N = 100


def _open_data(name: str):
    return resources.files("qcoupon.data").joinpath(name).open("r", encoding="utf-8")


def table1_counts() -> List[Tuple[BatchStats, Optional[int]]]:
    """Raw counts of the summary-table runs as (stats, detection_events)."""
    from .events import load_counts

    with _open_data("table1_counts.csv") as handle:
        return load_counts(handle)


@dataclass(frozen=True)
class BlindboxRun:
    m: int
    intensity: float
    total_periods: int
    m_clicks: int
    correct_clicks: int

    @property
    def efficiency(self) -> float:
        return self.m_clicks / self.total_periods

    @property
    def correct_prob(self) -> float:
        return self.correct_clicks / self.m_clicks

    @property
    def success_prob(self) -> float:
        return self.correct_clicks / self.total_periods


def blindbox_runs() -> List[BlindboxRun]:
    with _open_data("blindbox_runs.csv") as handle:
        reader = csv.DictReader(handle)
        return [
            BlindboxRun(
                m=int(row["m"]),
                intensity=float(row["intensity"]),
                total_periods=int(row["total_periods"]),
                m_clicks=int(row["m_clicks"]),
                correct_clicks=int(row["correct_clicks"]),
            )
            for row in reader
        ]
