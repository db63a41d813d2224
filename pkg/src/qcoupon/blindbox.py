"""Blind-box wagering game: pricing, payoff and per-play simulation.

A session hides m of the n patterns. Each play the player names a
per-pulse intensity, pays n * intensity * log2(n) bits, and sees the raw
click pattern of one detection period; the decode verdict is withheld so
guessing is the player's call. A correct guess of the hidden set pays
the classical information cost of the same task; a wrong guess pays
nothing and closes the session.

The reward uses a natural-log middle factor, (n-m) * ln(n-m) * log2(n),
which matches the tabulated payout values; the base-2 variant remains
available behind `reward_log2`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from . import analytic
from .errors import SessionClosedError, ZeroSuccessError
from .model import ChannelParams, CouponInstance, PeriodOutcome
from .montecarlo import simulate_period

__all__ = [
    "GameConfig",
    "GameSession",
    "PlayRecord",
    "price",
    "classical_resources",
    "expected_quantum_resources",
    "expected_spend_at_success",
    "new_session",
    "play",
    "guess",
]

STATE_OPEN = "open"
STATE_WON = "won"
STATE_LOST = "lost"


def price(n: int, intensity: float) -> float:
    """Cost of one play in bits: n * intensity * log2(n)."""
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    intensity = float(intensity)
    if intensity < 0.0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    return n * intensity * math.log2(n)


def classical_resources(n: int, m: int, reward_log2: bool = False) -> float:
    """Classical information cost of learning the hidden set, in bits."""
    n, m = int(n), int(m)
    if n - m < 2:
        raise ValueError(f"need n - m >= 2, got n={n} m={m}")
    middle = math.log2(n - m) if reward_log2 else math.log(n - m)
    return (n - m) * middle * math.log2(n)


def expected_spend_at_success(n: int, intensity: float, success_prob: float) -> float:
    """Expected total spend until the first fully correct pattern, given
    the per-period success probability."""
    if not 0.0 < success_prob <= 1.0:
        raise ZeroSuccessError(f"success probability must be in (0, 1], got {success_prob}")
    return price(n, intensity) / success_prob


def expected_quantum_resources(
    params: ChannelParams, n: int, m: int, intensity: float
) -> float:
    """Expected spend until a correct pattern under the click model."""
    n, m = int(n), int(m)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
    s = analytic.success_prob(params, intensity, m, n - m)
    if s <= 0.0:
        raise ZeroSuccessError(
            f"success probability underflowed to 0 at intensity {intensity!r}"
        )
    return price(n, intensity) / s


@dataclass(frozen=True)
class GameConfig:
    n: int
    m: int
    params: ChannelParams
    reward_log2: bool = False

    def __post_init__(self) -> None:
        n, m = int(self.n), int(self.m)
        if not 1 <= m < n:
            raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
        if n - m < 2:
            raise ValueError(f"need n - m >= 2 for a payable reward, got n={n} m={m}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)

    @property
    def reward(self) -> float:
        return classical_resources(self.n, self.m, self.reward_log2)


@dataclass(frozen=True)
class PlayRecord:
    intensity: float
    clicked_bins: Tuple[int, ...]


@dataclass
class GameSession:
    """Mutable game state; mutate through play()/guess() only."""

    config: GameConfig
    seed: int
    hidden_missing: FrozenSet[int]
    plays: List[PlayRecord] = field(default_factory=list)
    state: str = STATE_OPEN
    payoff: Optional[float] = None
    _rng: np.random.Generator = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def spent(self) -> float:
        """Ledger total; exactly-rounded sum so equal-intensity plays
        aggregate to plays * price."""
        return math.fsum(price(self.config.n, p.intensity) for p in self.plays)

    @property
    def instance(self) -> CouponInstance:
        return CouponInstance.from_missing(self.config.n, self.hidden_missing)

    @property
    def net(self) -> Optional[float]:
        if self.payoff is None:
            return None
        return self.payoff - self.spent


def new_session(seed: int, config: GameConfig) -> GameSession:
    """Open a session with a uniformly drawn hidden set.

    The seed drives both the hidden-set draw and every subsequent play,
    so a session replays exactly from (seed, intensity sequence).
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    hidden = frozenset(int(i) + 1 for i in rng.choice(config.n, size=config.m, replace=False))
    return GameSession(config=config, seed=int(seed), hidden_missing=hidden, _rng=rng)


def play(
    session: GameSession,
    intensity: float,
    rng: Optional[np.random.Generator] = None,
) -> PeriodOutcome:
    """Simulate one detection period and charge its price to the ledger.

    Returns the full outcome; service layers should reveal only the click
    pattern and leave the verdict to the player.
    """
    if session.state != STATE_OPEN:
        raise SessionClosedError(f"session is {session.state}")
    intensity = float(intensity)
    if intensity < 0.0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    outcome = simulate_period(
        rng if rng is not None else session._rng,
        session.instance,
        session.config.params,
        intensity,
    )
    session.plays.append(
        PlayRecord(intensity=intensity, clicked_bins=tuple(sorted(outcome.clicked_bins)))
    )
    return outcome


def guess(session: GameSession, guessed_missing: Iterable[int]) -> float:
    """Resolve the session. Wrong-size guesses are rejected without
    closing it; a size-m guess settles to won (reward) or lost (0)."""
    if session.state != STATE_OPEN:
        raise SessionClosedError(f"session is {session.state}")
    guessed = frozenset(int(i) for i in guessed_missing)
    if len(guessed) != session.config.m:
        raise ValueError(
            f"guess must name exactly {session.config.m} patterns, got {len(guessed)}"
        )
    if guessed and (min(guessed) < 1 or max(guessed) > session.config.n):
        raise ValueError("guessed patterns must lie in 1..n")
    if guessed == session.hidden_missing:
        session.state = STATE_WON
        session.payoff = session.config.reward
    else:
        session.state = STATE_LOST
        session.payoff = 0.0
    return session.payoff
