"""Shared fixtures: synthetic price paths, crowd files, and run configs."""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np
import pytest

from fxbarrier import PriceSeries, QuoteDirection


def weekday_dates(start: dt.date, count: int) -> list[dt.date]:
    out = []
    d = start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def random_walk_series(
    pair_id: str = "EURUSD",
    seed: int = 1,
    n: int = 120,
    x0: float = 1.0,
    sigma: float = 0.008,
    start: dt.date = dt.date(2022, 1, 3),
    quote_direction: QuoteDirection = QuoteDirection.USD_PER_CCY,
) -> PriceSeries:
    rng = np.random.default_rng(seed)
    dates = weekday_dates(start, n)
    rates = x0 + np.cumsum(rng.normal(0.0, sigma, n))
    return PriceSeries(pair_id, tuple(zip(dates, rates.tolist())), quote_direction)


def write_price_csv(path: Path, series: PriceSeries) -> Path:
    lines = ["date,rate"]
    lines += [f"{d.isoformat()},{r!r}" for d, r in series.points]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_crowd_csv(path: Path, rows: list[tuple[str, str, str, float]]) -> Path:
    lines = ["question_id,forecaster_id,timestamp_rfc3339,probability"]
    lines += [f"{q},{f},{ts},{p}" for q, f, ts, p in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def fixture_series() -> PriceSeries:
    return random_walk_series(seed=3, n=60)


def default_crowd_rows(qid: str, dates: list[dt.date]) -> list[tuple[str, str, str, float]]:
    """A small staggered set of submissions across three forecasters."""
    rows = []
    probs = {"alice": 0.3, "bob": 0.45, "carol": 0.2}
    for i, d in enumerate(dates):
        for j, (fid, base) in enumerate(sorted(probs.items())):
            if (i + j) % 2 == 0:
                p = min(max(base + 0.02 * ((i + j) % 5) - 0.04, 0.01), 0.99)
                rows.append((qid, fid, f"{d.isoformat()}T{10 + j:02d}:30:00Z", round(p, 3)))
    return rows


def build_config(
    tmp_path: Path,
    *,
    seed: int = 2022,
    n_paths: int = 1500,
    workers: int = 1,
    with_crowd: bool = True,
    with_pegged: bool = True,
    question_order: list[str] | None = None,
    extra: dict | None = None,
) -> Path:
    """Write a small but complete run setup into tmp_path; returns config path."""
    prices_dir = tmp_path / "prices"
    prices_dir.mkdir(exist_ok=True)
    flt = random_walk_series("FLTUSD", seed=11, n=90, x0=1.0, sigma=0.008)
    write_price_csv(prices_dir / "flt.csv", flt)
    price_files = [{"pair_id": "FLTUSD", "path": "prices/flt.csv"}]

    open_date = flt.dates[15]
    close_date = flt.dates[-1]
    questions = [
        {
            "question_id": "q-flt",
            "pair_id": "FLTUSD",
            "open_date": open_date.isoformat(),
            "close_date": close_date.isoformat(),
            "threshold_kind": "relative_depreciation",
            "threshold_value": 0.05,
        }
    ]
    crowd_rows = default_crowd_rows("q-flt", list(flt.dates[15:80:4]))

    if with_pegged:
        rng = np.random.default_rng(5)
        peg_dates = weekday_dates(dt.date(2022, 1, 3), 90)
        peg_rates = 3.75 + rng.normal(0, 1e-4, 90)
        peg = PriceSeries(
            "PEGUSD",
            tuple(zip(peg_dates, peg_rates.tolist())),
            QuoteDirection.CCY_PER_USD,
        )
        write_price_csv(prices_dir / "peg.csv", peg)
        price_files.append(
            {
                "pair_id": "PEGUSD",
                "path": "prices/peg.csv",
                "quote_direction": "ccy_per_usd",
            }
        )
        questions.append(
            {
                "question_id": "q-peg",
                "pair_id": "PEGUSD",
                "open_date": peg_dates[15].isoformat(),
                "close_date": peg_dates[-1].isoformat(),
                "threshold_kind": "relative_depreciation",
                "threshold_value": 0.15,
                "non_floating": True,
            }
        )
        crowd_rows += default_crowd_rows("q-peg", list(peg.dates[15:80:5]))

    config = {
        "seed": seed,
        "n_paths": n_paths,
        "step_mode": "trading_days",
        "workers": workers,
        "output_dir": "out",
        "consensus": {"method": "weighted_median", "extremize_a": 2.0, "recency_shape": 1.0},
        "price_files": price_files,
        "questions": questions,
    }
    if with_crowd:
        write_crowd_csv(tmp_path / "crowd.csv", crowd_rows)
        config["crowd_file"] = "crowd.csv"
    if question_order is not None:
        by_id = {q["question_id"]: q for q in config["questions"]}
        config["questions"] = [by_id[qid] for qid in question_order]
    if extra:
        config.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path
