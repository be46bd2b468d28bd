"""Extraction of chain parameters from observed weight traces.

Only the first beaker is observable (the device reads channel conductance),
so unknown couplings/capacities are recovered by matching simulated u1 to the
recorded u1 under the known pulse schedule.  The search runs in log2 space
(couplings are naturally expressed as powers of two): a coarse grid first,
then a Nelder-Mead polish from the best grid point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .chain import ChainConfig, DriveRule, build_propagator
from .errors import InvalidInputError, UnidentifiableError
from .protocol import PulseSchedule, WeightTrace, sample_u1_at

GRID_POINTS = 17
MAX_REFINE_EVALS = 500
SIMPLEX_TOL = 1e-3
FLAT_AXIS_TOL = 1e-12


@dataclass
class FitProblem:
    """Observed u1 samples plus the schedule and chain template behind them.

    `capacities` and `couplings` describe the chain with unknowns set to
    None; `bounds` gives one (lo, hi) log2 interval per unknown, couplings
    first (in index order) then capacities.
    """

    times: np.ndarray
    u1: np.ndarray
    schedules: list[PulseSchedule]
    capacities: list[float | None]
    couplings: list[float | None]
    bounds: list[tuple[float, float]]
    rule: DriveRule = field(default_factory=DriveRule.constant)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        if self.times.shape != self.u1.shape or self.times.ndim != 1 or self.times.size == 0:
            raise InvalidInputError("observed times and u1 must be matching 1-D arrays")
        if np.any(np.diff(self.times) < 0.0):
            raise InvalidInputError("observed times must be ascending")
        if len(self.capacities) != len(self.couplings) + 1:
            raise InvalidInputError("need K capacities and K-1 couplings")
        if not self.schedules:
            raise InvalidInputError("at least one schedule is required")
        n_unknown = sum(v is None for v in self.couplings) + sum(
            v is None for v in self.capacities
        )
        if n_unknown == 0:
            raise InvalidInputError("no unknowns to fit")
        if len(self.bounds) != n_unknown:
            raise InvalidInputError(f"need {n_unknown} bound pairs, got {len(self.bounds)}")
        for lo, hi in self.bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidInputError("bounds must be finite with lo < hi")

    @classmethod
    def from_trace(cls, trace: WeightTrace, **kwargs) -> "FitProblem":
        return cls(times=trace.times, u1=trace.u1, **kwargs)

    @property
    def n_unknowns(self) -> int:
        return len(self.bounds)

    def config_for(self, candidate_log2: np.ndarray) -> ChainConfig:
        values = iter(2.0 ** np.asarray(candidate_log2, dtype=float))
        gs = [g if g is not None else float(next(values)) for g in self.couplings]
        caps = [c if c is not None else float(next(values)) for c in self.capacities]
        return ChainConfig(caps, gs)


def residual(problem: FitProblem, candidate_log2) -> float:
    """RMS mismatch between observed and simulated u1 at the sample times."""
    cfg = problem.config_for(np.asarray(candidate_log2, dtype=float))
    prop = build_propagator(cfg)
    sim = sample_u1_at(prop, problem.rule, problem.schedules, problem.times)
    return float(np.sqrt(np.mean((problem.u1 - sim) ** 2)))


@dataclass(frozen=True)
class FitResult:
    estimates: np.ndarray  # log2 of each unknown, in problem order
    residual: float
    iterations: int


def _grid_axes(problem: FitProblem, points: int) -> list[np.ndarray]:
    return [np.linspace(lo, hi, points) for lo, hi in problem.bounds]


def _check_identifiable(problem, axes, best, cache):
    for j, axis in enumerate(axes):
        vals = []
        for x in axis:
            cand = best.copy()
            cand[j] = x
            key = tuple(cand)
            if key not in cache:
                cache[key] = residual(problem, cand)
            vals.append(cache[key])
        if max(vals) - min(vals) <= FLAT_AXIS_TOL:
            raise UnidentifiableError(
                f"unknown #{j} does not influence the observations within {FLAT_AXIS_TOL}"
            )


def fit(
    problem: FitProblem,
    grid_points: int = GRID_POINTS,
    max_refine_evals: int = MAX_REFINE_EVALS,
) -> FitResult:
    """Two-stage log2-domain fit: coarse grid, then Nelder-Mead refinement.

    Up to three unknowns are gridded jointly; beyond that the grid stage
    scans one coordinate at a time (two passes).  Refinement stops when the
    simplex diameter falls under 1e-3 log2 units or after 500 evaluations.
    """
    k = problem.n_unknowns
    axes = _grid_axes(problem, grid_points)
    lo = np.array([b[0] for b in problem.bounds])
    hi = np.array([b[1] for b in problem.bounds])
    cache: dict[tuple, float] = {}

    if k <= 3:
        best, best_r = None, np.inf
        for combo in itertools.product(*axes):
            cand = np.asarray(combo)
            r = residual(problem, cand)
            cache[tuple(cand)] = r
            if r < best_r:
                best, best_r = cand, r
    else:
        best = 0.5 * (lo + hi)
        best_r = residual(problem, best)
        for _ in range(2):
            for j in range(k):
                for x in axes[j]:
                    cand = best.copy()
                    cand[j] = x
                    key = tuple(cand)
                    r = cache.get(key)
                    if r is None:
                        r = residual(problem, cand)
                        cache[key] = r
                    if r < best_r:
                        best, best_r = cand, r
    grid_evals = len(cache) if cache else 1
    _check_identifiable(problem, axes, best, cache)

    def objective(x):
        clipped = np.clip(x, lo, hi)
        pen = float(np.sum((x - clipped) ** 2))
        return residual(problem, clipped) + 1e3 * pen

    span = hi - lo
    simplex = [best]
    for j in range(k):
        step = min(0.25, 0.1 * span[j])
        vertex = best.copy()
        vertex[j] = vertex[j] + step if vertex[j] + step <= hi[j] else vertex[j] - step
        simplex.append(vertex)
    res = minimize(
        objective,
        best,
        method="Nelder-Mead",
        options=dict(
            xatol=SIMPLEX_TOL,
            fatol=1e-12,
            maxfev=max_refine_evals,
            initial_simplex=np.asarray(simplex),
        ),
    )
    x = np.clip(res.x, lo, hi)
    r = residual(problem, x)
    if best_r < r:  # the polish must never lose to the grid
        x, r = best, best_r
    return FitResult(estimates=x, residual=r, iterations=grid_evals + int(res.nfev))
