"""Individual crowd forecasts and their consensus aggregates.

Two consensus rules are provided: a recency-weighted median of each
forecaster's latest probability (the community-style aggregate) and an
extremized mean-logit pool.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple

from .domain import ForecastSeries, Question, Source

_LOGIT_EPS = 1e-6
_CROWD_HEADER = ["question_id", "forecaster_id", "timestamp_rfc3339", "probability"]


class ConsensusMethod(str, Enum):
    WEIGHTED_MEDIAN = "weighted_median"
    LOGIT_COMBINE = "logit_combine"


@dataclass(frozen=True)
class CrowdRecord:
    """One forecaster's timestamped probability submission on one question."""

    question_id: str
    forecaster_id: str
    at: dt.datetime
    p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(self.p))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(
                f"{self.question_id}/{self.forecaster_id}: probability {self.p} "
                "outside [0, 1]"
            )


@dataclass(frozen=True)
class ConsensusParams:
    """Aggregation settings.

    recency_shape controls the weighted-median weights exp(shape * sqrt(rank));
    zero recovers the plain median. extremize_a scales the pooled logit; values
    above 1 push the combination away from one half.
    """

    method: ConsensusMethod = ConsensusMethod.WEIGHTED_MEDIAN
    extremize_a: float = 2.0
    recency_shape: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", ConsensusMethod(self.method))
        if self.extremize_a <= 0:
            raise ValueError("extremize_a must be positive")
        if self.recency_shape < 0:
            raise ValueError("recency_shape must be nonnegative")


class SnapshotEntry(NamedTuple):
    forecaster_id: str
    p: float
    age_rank: int


def latest_per_forecaster(
    records: Iterable[CrowdRecord], at: dt.datetime
) -> list[SnapshotEntry]:
    """Each forecaster's most recent probability at or before `at`.

    age_rank runs 1..N from the oldest to the newest latest-submission time,
    so higher ranks are fresher opinions. Ties on time break by forecaster id;
    a forecaster's same-instant duplicates keep the later record in input
    order. Forecasters with no submission yet are absent.
    """
    latest: dict[str, tuple[dt.datetime, int, float]] = {}
    for order, rec in enumerate(records):
        if rec.at > at:
            continue
        key = (rec.at, order, rec.p)
        if rec.forecaster_id not in latest or key[:2] >= latest[rec.forecaster_id][:2]:
            latest[rec.forecaster_id] = key
    ordered = sorted(latest.items(), key=lambda kv: (kv[1][0], kv[0]))
    return [
        SnapshotEntry(fid, p, rank)
        for rank, (fid, (_, _, p)) in enumerate(ordered, start=1)
    ]


def community_prediction(
    snapshot: Iterable[SnapshotEntry], params: ConsensusParams
) -> float:
    """Recency-weighted median of a latest-per-forecaster snapshot.

    Weights are exp(recency_shape * sqrt(age_rank)). The result is the
    smallest probability whose cumulative weight, over probabilities sorted
    ascending, reaches half the total weight; this tie-break is deterministic
    and independent of input order.
    """
    entries = list(snapshot)
    if not entries:
        raise ValueError("no forecasts in snapshot")
    weighted = sorted(
        (e.p, math.exp(params.recency_shape * math.sqrt(e.age_rank))) for e in entries
    )
    total = math.fsum(w for _, w in weighted)
    acc = 0.0
    for p, w in weighted:
        acc += w
        if acc >= total / 2.0:
            return p
    return weighted[-1][0]


def combine_logit(ps: Iterable[float], a: float) -> float:
    """Extremized logit pool: logistic(a * mean(logit(p)))."""
    values = list(ps)
    if not values:
        raise ValueError("combine_logit needs at least one probability")
    if a <= 0:
        raise ValueError("a must be positive")
    logits = []
    for p in values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        clamped = min(max(p, _LOGIT_EPS), 1.0 - _LOGIT_EPS)
        logits.append(math.log(clamped / (1.0 - clamped)))
    pooled = a * math.fsum(logits) / len(logits)
    return 1.0 / (1.0 + math.exp(-pooled))


def _end_of_day(date: dt.date) -> dt.datetime:
    return dt.datetime.combine(date, dt.time.max, tzinfo=dt.timezone.utc)


def crowd_series(
    records: Iterable[CrowdRecord],
    question: Question,
    sample_dates: Iterable[dt.date],
    params: ConsensusParams,
) -> ForecastSeries:
    """Consensus evaluated at each sample date's end of day.

    Dates with no submissions yet are omitted. Callers must pass dates within
    [scoring_start, resolve_date) so the series honours its resolution bound.
    """
    relevant = [r for r in records if r.question_id == question.question_id]
    points = []
    for d in sorted(set(sample_dates)):
        snapshot = latest_per_forecaster(relevant, _end_of_day(d))
        if not snapshot:
            continue
        if params.method is ConsensusMethod.WEIGHTED_MEDIAN:
            p = community_prediction(snapshot, params)
        else:
            p = combine_logit([e.p for e in snapshot], params.extremize_a)
        points.append((d, p))
    return ForecastSeries(question.question_id, Source.CROWD, tuple(points))


def _parse_rfc3339(text: str) -> dt.datetime:
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    stamp = dt.datetime.fromisoformat(cleaned)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=dt.timezone.utc)
    return stamp.astimezone(dt.timezone.utc)


def load_crowd_csv(path: str | Path) -> list[CrowdRecord]:
    """Read crowd records from CSV and sort them by timestamp.

    Expected header: question_id,forecaster_id,timestamp_rfc3339,probability.
    Rows may arrive in any order; malformed rows fail with their line number.
    """
    path = Path(path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != _CROWD_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(_CROWD_HEADER)!r}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                record = CrowdRecord(
                    question_id=row[0].strip(),
                    forecaster_id=row[1].strip(),
                    at=_parse_rfc3339(row[2]),
                    p=float(row[3]),
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            records.append(record)
    records.sort(key=lambda r: r.at)
    return records
