"""Domain types for barrier-event exchange rate questions and their forecasts."""

from __future__ import annotations

import datetime as dt
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum


class QuoteDirection(str, Enum):
    """How a price series quotes the currency against the US dollar.

    USD_PER_CCY: dollars per unit of currency; depreciation pushes the rate down.
    CCY_PER_USD: currency units per dollar; depreciation pushes the rate up.
    """

    USD_PER_CCY = "usd_per_ccy"
    CCY_PER_USD = "ccy_per_usd"


class Source(str, Enum):
    """Origin of a forecast or score series."""

    RANDOM_WALK = "random_walk"
    CROWD = "crowd"
    COMBINED = "combined"


class ThresholdKind(str, Enum):
    RELATIVE_DEPRECIATION = "relative_depreciation"
    ABSOLUTE_LEVEL = "absolute_level"


def _check_points(points, label: str, low: float = 0.0, high: float = 1.0) -> tuple:
    out = []
    prev = None
    for date, value in points:
        value = float(value)
        if prev is not None and date <= prev:
            raise ValueError(f"{label}: dates must be strictly increasing (at {date})")
        if not low <= value <= high:
            raise ValueError(f"{label}: value {value} at {date} outside [{low}, {high}]")
        out.append((date, value))
        prev = date
    return tuple(out)


@dataclass(frozen=True)
class PriceSeries:
    """Dated daily exchange-rate levels for one currency pair.

    Dates are strictly increasing, every rate is positive, and calendar gaps
    (weekends, holidays) are preserved exactly as observed.
    """

    pair_id: str
    points: tuple[tuple[dt.date, float], ...]
    quote_direction: QuoteDirection = QuoteDirection.USD_PER_CCY

    def __post_init__(self) -> None:
        cleaned = []
        prev = None
        for date, rate in self.points:
            rate = float(rate)
            if prev is not None and date <= prev:
                raise ValueError(
                    f"{self.pair_id}: dates must be strictly increasing (at {date})"
                )
            if rate <= 0:
                raise ValueError(f"{self.pair_id}: non-positive rate {rate} at {date}")
            cleaned.append((date, rate))
            prev = date
        object.__setattr__(self, "points", tuple(cleaned))
        object.__setattr__(
            self, "quote_direction", QuoteDirection(self.quote_direction)
        )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(d for d, _ in self.points)

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(r for _, r in self.points)

    def rate_on(self, date: dt.date) -> float:
        """Rate observed exactly on `date`, or KeyError if not a trading day."""
        dates = self.dates
        i = bisect_left(dates, date)
        if i == len(dates) or dates[i] != date:
            raise KeyError(f"{self.pair_id}: no observation on {date}")
        return self.points[i][1]

    def first_rate_on_or_after(self, date: dt.date) -> float | None:
        dates = self.dates
        i = bisect_left(dates, date)
        return self.points[i][1] if i < len(dates) else None

    def window(self, start: dt.date | None = None, end: dt.date | None = None) -> PriceSeries:
        """Sub-series with dates in [start, end] (either bound optional)."""
        dates = self.dates
        lo = 0 if start is None else bisect_left(dates, start)
        hi = len(dates) if end is None else bisect_right(dates, end)
        return PriceSeries(self.pair_id, self.points[lo:hi], self.quote_direction)


@dataclass(frozen=True)
class Question:
    """A barrier event: will the currency hit its depreciation threshold before close?

    `scoring_start_date` marks the first day forecasts are produced and scored;
    it defaults to `open_date` and exists so a harness can skip days before a
    question was actually live.
    """

    question_id: str
    pair_id: str
    open_date: dt.date
    close_date: dt.date
    baseline_rate: float
    threshold_kind: ThresholdKind
    threshold_value: float
    scoring_start_date: dt.date | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "threshold_kind", ThresholdKind(self.threshold_kind))
        object.__setattr__(self, "baseline_rate", float(self.baseline_rate))
        object.__setattr__(self, "threshold_value", float(self.threshold_value))
        if self.open_date >= self.close_date:
            raise ValueError(
                f"{self.question_id}: open_date {self.open_date} must precede "
                f"close_date {self.close_date}"
            )
        if self.baseline_rate <= 0:
            raise ValueError(f"{self.question_id}: baseline_rate must be positive")
        if self.threshold_kind is ThresholdKind.RELATIVE_DEPRECIATION:
            if not 0.0 < self.threshold_value < 1.0:
                raise ValueError(
                    f"{self.question_id}: relative threshold must lie in (0, 1)"
                )
        elif self.threshold_value <= 0:
            raise ValueError(f"{self.question_id}: absolute threshold must be positive")
        if self.scoring_start_date is not None and not (
            self.open_date <= self.scoring_start_date < self.close_date
        ):
            raise ValueError(
                f"{self.question_id}: scoring_start_date must lie in "
                "[open_date, close_date)"
            )

    @property
    def scoring_start(self) -> dt.date:
        return self.scoring_start_date or self.open_date


@dataclass(frozen=True)
class Resolution:
    """Binary outcome of a question: k=1 on the crossing day, k=0 at close."""

    question_id: str
    outcome: int
    resolve_date: dt.date

    def __post_init__(self) -> None:
        if self.outcome not in (0, 1):
            raise ValueError(f"{self.question_id}: outcome must be 0 or 1")


@dataclass(frozen=True)
class ForecastSeries:
    """Dated probabilities from one forecasting method for one question.

    Producers must not emit points dated after the question's resolve date.
    """

    question_id: str
    source: Source
    points: tuple[tuple[dt.date, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(
            self, "points", _check_points(self.points, f"forecast {self.question_id}")
        )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(d for d, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.points)


@dataclass(frozen=True)
class ScoreSeries:
    """Dated squared-error scores for one question and source."""

    question_id: str
    source: Source
    points: tuple[tuple[dt.date, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(
            self, "points", _check_points(self.points, f"scores {self.question_id}")
        )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(d for d, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(s for _, s in self.points)


def threshold_rate(question: Question) -> float:
    """Barrier level implied by the question, in dollars-per-currency terms.

    Relative questions put the barrier at baseline * (1 - threshold_value);
    absolute questions state the level directly.
    """
    if question.threshold_kind is ThresholdKind.RELATIVE_DEPRECIATION:
        return question.baseline_rate * (1.0 - question.threshold_value)
    return question.threshold_value


def barrier_rate(question: Question, direction: QuoteDirection) -> float:
    """Barrier level in the units the price series is quoted in.

    For currency-per-dollar quotes a depreciation means the rate rises, and a
    relative loss of value v maps to baseline / (1 - v) since the quoted rate
    is the reciprocal of the currency's dollar value.
    """
    direction = QuoteDirection(direction)
    if direction is QuoteDirection.USD_PER_CCY:
        return threshold_rate(question)
    if question.threshold_kind is ThresholdKind.RELATIVE_DEPRECIATION:
        return question.baseline_rate / (1.0 - question.threshold_value)
    return question.threshold_value


def crossing_hit(rate: float, barrier: float, direction: QuoteDirection) -> bool:
    """Whether an observed rate touches or passes the depreciation barrier."""
    if QuoteDirection(direction) is QuoteDirection.USD_PER_CCY:
        return rate <= barrier
    return rate >= barrier


def resolve(series: PriceSeries, question: Question) -> Resolution:
    """Resolve a question against daily closes.

    k=1 on the first observed date in (open_date, close_date] at which the
    barrier is touched or crossed, else k=0 at close_date. Intraday moves are
    invisible at this data granularity. Data after the resolve date never
    affects the result.
    """
    if series.pair_id != question.pair_id:
        raise ValueError(
            f"pair mismatch: series {series.pair_id!r} vs question "
            f"{question.pair_id!r}"
        )
    in_window = [
        (d, r)
        for d, r in series.points
        if question.open_date <= d <= question.close_date
    ]
    if not in_window:
        raise ValueError(
            f"insufficient data: {series.pair_id} has no observations in "
            f"[{question.open_date}, {question.close_date}]"
        )
    barrier = barrier_rate(question, series.quote_direction)
    for d, r in in_window:
        if d > question.open_date and crossing_hit(r, barrier, series.quote_direction):
            return Resolution(question.question_id, 1, d)
    return Resolution(question.question_id, 0, question.close_date)
