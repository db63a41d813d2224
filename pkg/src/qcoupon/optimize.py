"""Intensity selection and classical-vs-quantum crossover analysis.

The resource cost R(I) is smooth but not guaranteed unimodal, so the
constrained minimizer is located in two stages: a log-spaced grid scan
finds the feasible region and the best bracket, then golden-section
refines inside it. Feasibility means the conditional correct probability
meets the requested floor; infeasible intensities score +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import analytic
from .errors import DegenerateEfficiencyError, InfeasibleConstraintError, ZeroSuccessError
from .model import ChannelParams

__all__ = [
    "SweepPoint",
    "CrossoverReport",
    "sweep_intensity",
    "optimal_intensity",
    "crossover",
    "DEFAULT_GRID",
]

# (i_min, i_max, points) for the feasibility/bracketing scan
DEFAULT_GRID: Tuple[float, float, int] = (1e-3, 1e2, 400)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepPoint:
    intensity: float
    efficiency: float
    correct_prob: float
    success_prob: float
    quantum_samples: float


@dataclass(frozen=True)
class CrossoverReport:
    """Quantum-vs-classical costs over a grid of universe sizes."""

    n_values: Tuple[int, ...]
    quantum_cost: Tuple[float, ...]
    classical_cost: Tuple[float, ...]
    chosen_intensity: Tuple[float, ...]
    crossover_n: Optional[int]
    half_cost_n: Optional[int]


def sweep_intensity(
    params: ChannelParams,
    n: int,
    m: int,
    i_min: float,
    i_max: float,
    steps: int,
) -> List[SweepPoint]:
    """Protocol statistics on a uniform intensity grid."""
    i_min, i_max = float(i_min), float(i_max)
    steps = int(steps)
    if not 0.0 < i_min < i_max:
        raise ValueError(f"need 0 < i_min < i_max, got [{i_min}, {i_max}]")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    points = []
    for intensity in np.linspace(i_min, i_max, steps):
        stats = analytic.protocol_stats(params, float(intensity), n, m)
        points.append(
            SweepPoint(
                intensity=float(intensity),
                efficiency=stats.efficiency,
                correct_prob=stats.correct_prob,
                success_prob=stats.success_prob,
                quantum_samples=stats.quantum_samples,
            )
        )
    return points


def _evaluate(
    params: ChannelParams, intensity: float, n: int, m: int
) -> Tuple[float, float]:
    """(correct_prob, quantum_samples) with degenerate points mapped to
    (0, inf) so the optimizer can treat them as infeasible."""
    k = n - m
    try:
        corr = analytic.correct_prob(params, intensity, m, k)
        samples = analytic.quantum_samples(params, intensity, n, m)
    except (DegenerateEfficiencyError, ZeroSuccessError):
        return 0.0, math.inf
    return corr, samples


def _golden_min(objective, lo: float, hi: float, iterations: int = 80) -> float:
    """Golden-section argmin of a 1-D objective on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(d)
        if (b - a) <= 1e-12 * max(1.0, abs(a)):
            break
    return (a + b) / 2.0


def _feasibility_boundary(
    params: ChannelParams,
    n: int,
    m: int,
    constraint: float,
    lo: float,
    hi: float,
) -> float:
    """Bisect the smallest feasible intensity in (lo, hi]; hi is feasible."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _evaluate(params, mid, n, m)[0] >= constraint:
            hi = mid
        else:
            lo = mid
        if (hi - lo) <= 1e-12 * max(1.0, hi):
            break
    return hi


def optimal_intensity(
    params: ChannelParams,
    n: int,
    m: int,
    constraint: float = 0.0,
    grid: Tuple[float, float, int] = DEFAULT_GRID,
) -> Tuple[float, float]:
    """Intensity minimizing the quantum sample cost subject to a correct
    probability floor. Returns (intensity, quantum_samples); ties resolve
    toward the smaller intensity.
    """
    n, m = int(n), int(m)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got n={n} m={m}")
    constraint = float(constraint)
    if not 0.0 <= constraint < 1.0:
        raise ValueError(f"constraint must lie in [0, 1), got {constraint}")
    i_min, i_max, points = grid
    values = np.geomspace(i_min, i_max, int(points))
    evals = [_evaluate(params, float(i), n, m) for i in values]
    feasible = [j for j, (corr, r) in enumerate(evals) if corr >= constraint and math.isfinite(r)]
    if not feasible:
        raise InfeasibleConstraintError(
            f"no intensity in [{i_min}, {i_max}] reaches correct >= {constraint}"
        )
    best = min(feasible, key=lambda j: (evals[j][1], values[j]))

    lo = float(values[max(best - 1, 0)])
    hi = float(values[min(best + 1, len(values) - 1)])
    if best > 0 and (best - 1) not in feasible:
        # left neighbor fails the constraint: sharpen the feasible edge
        lo = _feasibility_boundary(params, n, m, constraint, lo, float(values[best]))

    def objective(intensity: float) -> float:
        corr, r = _evaluate(params, intensity, n, m)
        return r if corr >= constraint else math.inf

    refined = _golden_min(objective, lo, hi)
    candidates = [lo, refined, float(values[best])]
    scored = [(objective(i), i) for i in candidates]
    scored = [(r, i) for r, i in scored if math.isfinite(r)]
    r_star, i_star = min(scored, key=lambda pair: (pair[0], pair[1]))
    return i_star, r_star


def crossover(
    params: ChannelParams,
    m: int,
    constraint: float,
    n_grid: Sequence[int],
) -> CrossoverReport:
    """Quantum cost at the constrained optimum versus k*ln(k), per n.

    Infeasible sizes are marked with an infinite quantum cost rather than
    aborting the report.
    """
    n_values = tuple(int(n) for n in n_grid)
    if not n_values or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_grid must be nonempty and strictly increasing")
    quantum: List[float] = []
    classical: List[float] = []
    intensities: List[float] = []
    for n in n_values:
        classical.append(analytic.classical_limit(n - m))
        try:
            intensity, cost = optimal_intensity(params, n, m, constraint)
        except InfeasibleConstraintError:
            intensity, cost = math.nan, math.inf
        quantum.append(cost)
        intensities.append(intensity)
    below = [n for n, q, c in zip(n_values, quantum, classical) if q < c]
    below_half = [n for n, q, c in zip(n_values, quantum, classical) if q < c / 2.0]
    return CrossoverReport(
        n_values=n_values,
        quantum_cost=tuple(quantum),
        classical_cost=tuple(classical),
        chosen_intensity=tuple(intensities),
        crossover_n=max(below) if below else None,
        half_cost_n=max(below_half) if below_half else None,
    )
