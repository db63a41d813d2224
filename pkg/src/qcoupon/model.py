"""Domain types shared across the package.

Everything here is an immutable value: channel imperfection parameters,
a coupon-collector instance (universe, hidden set, complement), the
phase-sign pulse train encoding of a hidden set, and the outcome of one
detection period. Bin/element indices are 1-based throughout, matching
the convention that the universe is {1, ..., n}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional

import numpy as np

__all__ = [
    "ChannelParams",
    "CouponInstance",
    "PulseTrain",
    "PeriodOutcome",
    "encode",
]


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or not np.isfinite(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class ChannelParams:
    """Hardware imperfection triple governing all click probabilities.

    eta        combined channel x detector transmittance
    dark_rate  dark-count probability per detection gate
    visibility interferometer visibility
    """

    eta: float = 1.0
    dark_rate: float = 0.0
    visibility: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", _check_unit_interval("eta", self.eta))
        object.__setattr__(self, "dark_rate", _check_unit_interval("dark_rate", self.dark_rate))
        object.__setattr__(self, "visibility", _check_unit_interval("visibility", self.visibility))

    @classmethod
    def ideal(cls) -> "ChannelParams":
        return cls(eta=1.0, dark_rate=0.0, visibility=1.0)


@dataclass(frozen=True)
class CouponInstance:
    """Universe {1..n} with a hidden subset S of known size k = n - m.

    The protocol learns S by detecting its complement (the m missing
    elements), so both views are exposed.
    """

    n: int
    s_members: FrozenSet[int]

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 2:
            raise ValueError(f"universe size n must be >= 2, got {n}")
        members = frozenset(int(i) for i in self.s_members)
        if not members:
            raise ValueError("hidden set S must be nonempty (k >= 1)")
        if len(members) >= n:
            raise ValueError(f"hidden set size k={len(members)} must be < n={n}")
        if min(members) < 1 or max(members) > n:
            raise ValueError("hidden set members must lie in 1..n")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "s_members", members)

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]) -> "CouponInstance":
        return cls(n=n, s_members=frozenset(members))

    @classmethod
    def from_missing(cls, n: int, missing: Iterable[int]) -> "CouponInstance":
        """Build the instance whose complement is exactly `missing`."""
        miss = frozenset(int(i) for i in missing)
        if miss and (min(miss) < 1 or max(miss) > int(n)):
            raise ValueError("missing elements must lie in 1..n")
        return cls(n=n, s_members=frozenset(range(1, int(n) + 1)) - miss)

    @property
    def k(self) -> int:
        return len(self.s_members)

    @property
    def m(self) -> int:
        return self.n - self.k

    def complement(self) -> FrozenSet[int]:
        """The m missing elements: {1..n} minus S."""
        return frozenset(range(1, self.n + 1)) - self.s_members

    def missing_sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.complement()))


@dataclass(frozen=True)
class PulseTrain:
    """Per-pulse intensity plus the phase-sign sequence encoding a set.

    signs[i] is +1 when element i+1 belongs to the encoded set and -1
    otherwise. Intensity is the mean photon number per pulse; the total
    mean photon number of the train is n * intensity.
    """

    intensity: float
    signs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        intensity = float(self.intensity)
        if intensity < 0.0 or not np.isfinite(intensity):
            raise ValueError(f"intensity must be >= 0, got {intensity!r}")
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.ndim != 1 or signs.size == 0:
            raise ValueError("signs must be a nonempty 1-D sequence")
        if not np.all((signs == 1) | (signs == -1)):
            raise ValueError("signs must contain only +1 and -1")
        signs.setflags(write=False)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return int(self.signs.size)

    @property
    def total_mean_photons(self) -> float:
        return self.n * self.intensity


def encode(instance: CouponInstance, intensity: float) -> PulseTrain:
    """Encode an instance as a pulse train: +1 phase inside S, -1 outside."""
    if float(intensity) < 0.0:
        raise ValueError(f"intensity must be >= 0, got {intensity!r}")
    signs = np.full(instance.n, -1, dtype=np.int8)
    idx = np.fromiter(instance.s_members, dtype=np.int64, count=instance.k)
    signs[idx - 1] = 1
    return PulseTrain(intensity=float(intensity), signs=signs)


@dataclass(frozen=True)
class PeriodOutcome:
    """Detector click pattern of one period plus the decode verdict.

    A period is accepted exactly when the click count equals the known
    number of missing elements m; the guessed set is then the complement
    of the clicked bins. `correct` is None for discarded periods.
    """

    n: int
    m: int
    clicked_bins: FrozenSet[int]
    accepted: bool
    guessed_set: Optional[FrozenSet[int]]
    correct: Optional[bool]

    @classmethod
    def from_clicks(
        cls, instance: CouponInstance, clicked: Iterable[int]
    ) -> "PeriodOutcome":
        clicked_set = frozenset(int(b) for b in clicked)
        if clicked_set and (min(clicked_set) < 1 or max(clicked_set) > instance.n):
            raise ValueError("clicked bins must lie in 1..n")
        accepted = len(clicked_set) == instance.m
        if accepted:
            guessed = frozenset(range(1, instance.n + 1)) - clicked_set
            correct = clicked_set == instance.complement()
        else:
            guessed = None
            correct = None
        return cls(
            n=instance.n,
            m=instance.m,
            clicked_bins=clicked_set,
            accepted=accepted,
            guessed_set=guessed,
            correct=correct,
        )
