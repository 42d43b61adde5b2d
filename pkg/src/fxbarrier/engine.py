"""Rolling-volatility random-walk engine for barrier-crossing probabilities.

The model is a driftless random walk on daily exchange-rate levels,
x[t+1] = x[t] + e[t] with e[t] ~ Normal(0, sigma_h^2), where sigma_h is the
sample standard deviation of historical daily increments. Forecasts are
pseudo-out-of-sample: the estimate for day d uses price data up to d only.
"""

from __future__ import annotations

import datetime as dt
import hashlib
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

from .domain import (
    ForecastSeries,
    PriceSeries,
    Question,
    QuoteDirection,
    Source,
    barrier_rate,
    resolve,
)

# Philox-4x64 emits four 64-bit words per counter block; per-path strides are
# rounded up to whole blocks so any path's draws sit at fixed counter offsets.
_WORDS_PER_BLOCK = 4
_MAX_CHUNK_WORDS = 4_000_000


class StepMode(str, Enum):
    """How remaining forecast steps are counted.

    TRADING_DAYS counts weekdays only, since rates are not observed on
    weekends and a barrier cannot be touched on a day with no close.
    CALENDAR_DAYS counts every day, over-counting across weekends.
    """

    TRADING_DAYS = "trading_days"
    CALENDAR_DAYS = "calendar_days"


@dataclass(frozen=True)
class SimulationParams:
    """Monte Carlo settings. The seed is explicit: no entropy-seeded default."""

    seed: int
    n_paths: int = 10_000
    step_mode: StepMode = StepMode.TRADING_DAYS

    def __post_init__(self) -> None:
        object.__setattr__(self, "step_mode", StepMode(self.step_mode))
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class VolatilityEstimate:
    """Sample standard deviation of daily increments up to `as_of`."""

    as_of: dt.date
    sigma_h: float
    n_obs: int

    def __post_init__(self) -> None:
        if self.sigma_h < 0:
            raise ValueError("sigma_h must be nonnegative")
        if self.n_obs < 2:
            raise ValueError("need at least 2 increments")


def estimate_volatility(series: PriceSeries, as_of: dt.date) -> VolatilityEstimate:
    """Volatility of daily first differences using data on or before `as_of`.

    Increments are taken between consecutive observations (a weekend gap is
    one increment) and sigma_h is their n-1 sample standard deviation, so the
    estimate is in rate units per step. Raises on fewer than 3 observations.
    """
    rates = [r for d, r in series.points if d <= as_of]
    if len(rates) < 3:
        raise ValueError(
            f"insufficient history: need at least 3 observations on or before "
            f"{as_of}, have {len(rates)}"
        )
    diffs = np.diff(np.asarray(rates, dtype=np.float64))
    sigma = float(np.std(diffs, ddof=1))
    return VolatilityEstimate(as_of=as_of, sigma_h=sigma, n_obs=len(diffs))


def derive_seed(seed: int, question_id: str, date: dt.date) -> int:
    """Stable 64-bit substream seed for one (run seed, question, day) cell."""
    msg = f"{int(seed)}:{question_id}:{date.isoformat()}".encode()
    return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "big")


def _crossing_probability(d_over_sigma: float, n_steps: int, n_paths: int, seed: int) -> float:
    """Monte Carlo estimate of hitting a barrier `d_over_sigma` step-sigmas below start.

    Paths are built from unit-normal daily increments via inverse-CDF draws on
    a Philox counter stream: path i consumes the words at offsets
    [i*stride, i*stride + n_steps), so results are independent of chunking and
    of any parallel scheduling around this call. A path's hit probability is
    accumulated analytically between closes: conditional on consecutive levels
    a, c above the barrier, a continuous bridge touches it with probability
    exp(-2ac), so each path contributes 1 - prod(1 - p_step) instead of a
    raw indicator. This keeps the estimator unbiased for the first-passage
    probability of the underlying continuous walk and tightens the variance.
    """
    stride = -(-n_steps // _WORDS_PER_BLOCK) * _WORDS_PER_BLOCK
    chunk = max(1, min(n_paths, _MAX_CHUNK_WORDS // stride))
    survival = np.empty(n_paths, dtype=np.float64)
    start = 0
    while start < n_paths:
        stop = min(start + chunk, n_paths)
        bitgen = np.random.Philox(key=int(seed))
        bitgen.advance(start * stride // _WORDS_PER_BLOCK)
        uniforms = np.random.Generator(bitgen).random((stop - start, stride))
        levels = ndtri(uniforms[:, :n_steps])
        np.cumsum(levels, axis=1, out=levels)
        levels += d_over_sigma
        np.maximum(levels, 0.0, out=levels)
        left = np.empty_like(levels)
        left[:, 0] = d_over_sigma
        left[:, 1:] = levels[:, :-1]
        step_hit = np.exp(-2.0 * left * levels)
        np.prod(1.0 - step_hit, axis=1, out=survival[start:stop])
        start = stop
    return 1.0 - float(survival.mean())


def simulate_barrier_probability(
    x0: float,
    sigma: float,
    barrier: float,
    n_steps: int,
    params: SimulationParams,
) -> float:
    """Probability that the simulated walk falls to `barrier` within `n_steps`.

    Returns exactly 1.0 when the start is already at or below the barrier and
    0.0 when the walk cannot move (zero volatility or no steps remaining).
    Deterministic for fixed (seed, n_paths, inputs).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if x0 <= barrier:
        return 1.0
    if sigma == 0.0 or n_steps == 0:
        return 0.0
    return _crossing_probability(
        (x0 - barrier) / sigma, int(n_steps), params.n_paths, params.seed
    )


def analytic_barrier_probability(
    x0: float, sigma: float, barrier: float, n_steps: int
) -> float:
    """Closed-form first-passage probability for the driftless walk.

    Treats the walk as a Brownian motion with per-step variance sigma^2 and
    applies the reflection principle: 2 * Phi((barrier - x0) / (sigma sqrt(n))).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if x0 <= barrier:
        return 1.0
    if sigma == 0.0 or n_steps == 0:
        return 0.0
    return float(2.0 * ndtr((barrier - x0) / (sigma * np.sqrt(n_steps))))


def remaining_steps(date: dt.date, close_date: dt.date, step_mode: StepMode) -> int:
    """Number of simulation steps left in (date, close_date]."""
    if date >= close_date:
        return 0
    if StepMode(step_mode) is StepMode.CALENDAR_DAYS:
        return (close_date - date).days
    one = dt.timedelta(days=1)
    return int(np.busday_count(date + one, close_date + one))


def rolling_forecast(
    series: PriceSeries, question: Question, params: SimulationParams
) -> ForecastSeries:
    """Pseudo-out-of-sample barrier forecasts for every observed day.

    For each observed date d from the question's scoring start up to (but not
    including) its resolve date: volatility is re-estimated from data up to d,
    the remaining steps to close are counted under `params.step_mode`, and the
    crossing probability is simulated from the day-d close. Each day draws
    from a fresh substream derived from (seed, question_id, d), so a forecast
    depends only on information available on that day.
    """
    resolution = resolve(series, question)
    barrier = barrier_rate(question, series.quote_direction)
    mirrored = series.quote_direction is QuoteDirection.CCY_PER_USD
    dates = series.dates
    lo = bisect_right(dates, question.scoring_start - dt.timedelta(days=1))
    hi = bisect_right(dates, resolution.resolve_date - dt.timedelta(days=1))
    points = []
    for d, rate in series.points[lo:hi]:
        vol = estimate_volatility(series, d)
        steps = remaining_steps(d, question.close_date, params.step_mode)
        day_params = SimulationParams(
            seed=derive_seed(params.seed, question.question_id, d),
            n_paths=params.n_paths,
            step_mode=params.step_mode,
        )
        if mirrored:
            p = simulate_barrier_probability(-rate, vol.sigma_h, -barrier, steps, day_params)
        else:
            p = simulate_barrier_probability(rate, vol.sigma_h, barrier, steps, day_params)
        points.append((d, p))
    return ForecastSeries(question.question_id, Source.RANDOM_WALK, tuple(points))
