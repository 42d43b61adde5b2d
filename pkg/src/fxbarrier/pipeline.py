"""End-to-end comparison pipeline: ingest, forecast, score, calibrate, emit.

The run configuration is a single declarative JSON file; all paths inside it
resolve relative to the file's directory. Questions are processed
independently (optionally in parallel) and merged in question-id order, so
report files are byte-identical across reruns and worker counts.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .calibration import RegressionResult, align_series, ols_fit
from .crowd import ConsensusParams, CrowdRecord, crowd_series, combine_logit, load_crowd_csv
from .domain import (
    ForecastSeries,
    PriceSeries,
    Question,
    QuoteDirection,
    Resolution,
    ScoreSeries,
    Source,
    ThresholdKind,
    resolve,
)
from .engine import SimulationParams, StepMode, rolling_forecast
from .io import ingest_price_csv, load_consensus_csv
from .scoring import MeanScoreCurve, mean_score_curve, score_series

_QID_RE = re.compile(r"^[A-Za-z0-9._-]+$")

# Curve names double as mean_scores_<name>.csv file stems. The crowd-only
# curve covers questions the random walk cannot forecast (pegged currencies).
RW_CURVE = "random_walk"
CROWD_CURVE = "crowd"
COMBINED_CURVE = "combined"
CROWD_ONLY_CURVE = "crowd_only"


@dataclass(frozen=True)
class PriceFileSpec:
    pair_id: str
    path: Path
    quote_direction: QuoteDirection = QuoteDirection.USD_PER_CCY


@dataclass(frozen=True)
class QuestionSpec:
    """One question as configured; the baseline may be derived from prices.

    When baseline_rate is absent it defaults to the first observed rate on or
    after the open date. history_start trims the price series before
    volatility estimation (some questions use longer pre-open windows), and
    non_floating marks pegged currencies the random walk cannot forecast.
    """

    question_id: str
    pair_id: str
    open_date: dt.date
    close_date: dt.date
    threshold_kind: ThresholdKind
    threshold_value: float
    baseline_rate: float | None = None
    scoring_start_date: dt.date | None = None
    history_start: dt.date | None = None
    non_floating: bool = False


@dataclass(frozen=True)
class RunConfig:
    price_files: tuple[PriceFileSpec, ...]
    questions: tuple[QuestionSpec, ...]
    sim: SimulationParams
    consensus: ConsensusParams = ConsensusParams()
    crowd_file: Path | None = None
    external_consensus_file: Path | None = None
    output_dir: Path = Path("out")
    workers: int = 1

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        pairs = [p.pair_id for p in self.price_files]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate pair_id in price_files")
        qids = [q.question_id for q in self.questions]
        if len(set(qids)) != len(qids):
            raise ValueError("duplicate question_id in questions")
        if not self.questions:
            raise ValueError("config defines no questions")
        known = set(pairs)
        for q in self.questions:
            if not _QID_RE.match(q.question_id):
                raise ValueError(
                    f"question_id {q.question_id!r} must match {_QID_RE.pattern}"
                )
            if q.pair_id not in known:
                raise ValueError(
                    f"question {q.question_id!r}: no price file for pair "
                    f"{q.pair_id!r}"
                )


def _get(entry: dict, key: str, kind, where: str, required: bool = False):
    value = entry.get(key)
    if value is None:
        if required:
            raise ValueError(f"{where}: missing required field {key!r}")
        return None
    try:
        if kind is dt.date:
            return dt.date.fromisoformat(value)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: bad value for {key!r}: {value!r}") from exc


def load_config(path: str | Path, **overrides) -> RunConfig:
    """Parse a JSON run configuration.

    Recognised overrides: seed, n_paths, step_mode, output_dir, workers.
    The seed must be explicit, in the file or as an override; Monte Carlo runs
    are never entropy-seeded.
    """
    path = Path(path)
    base = path.parent
    with path.open(encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc

    seed = overrides.get("seed", raw.get("seed"))
    if seed is None:
        raise ValueError(f"{path}: an explicit seed is required")
    sim = SimulationParams(
        seed=int(seed),
        n_paths=int(overrides.get("n_paths", raw.get("n_paths", 10_000))),
        step_mode=StepMode(
            overrides.get("step_mode", raw.get("step_mode", StepMode.TRADING_DAYS))
        ),
    )
    cons_raw = raw.get("consensus", {})
    consensus = ConsensusParams(
        method=cons_raw.get("method", "weighted_median"),
        extremize_a=float(cons_raw.get("extremize_a", 2.0)),
        recency_shape=float(cons_raw.get("recency_shape", 1.0)),
    )

    price_files = []
    for i, entry in enumerate(raw.get("price_files", [])):
        where = f"{path}: price_files[{i}]"
        pair = _get(entry, "pair_id", str, where, required=True)
        rel = _get(entry, "path", str, where, required=True)
        direction = QuoteDirection(entry.get("quote_direction", "usd_per_ccy"))
        price_files.append(PriceFileSpec(pair, (base / rel).resolve(), direction))

    questions = []
    for i, entry in enumerate(raw.get("questions", [])):
        where = f"{path}: questions[{i}]"
        questions.append(
            QuestionSpec(
                question_id=_get(entry, "question_id", str, where, required=True),
                pair_id=_get(entry, "pair_id", str, where, required=True),
                open_date=_get(entry, "open_date", dt.date, where, required=True),
                close_date=_get(entry, "close_date", dt.date, where, required=True),
                threshold_kind=ThresholdKind(
                    _get(entry, "threshold_kind", str, where, required=True)
                ),
                threshold_value=_get(entry, "threshold_value", float, where, required=True),
                baseline_rate=_get(entry, "baseline_rate", float, where),
                scoring_start_date=_get(entry, "scoring_start_date", dt.date, where),
                history_start=_get(entry, "history_start", dt.date, where),
                non_floating=bool(entry.get("non_floating", False)),
            )
        )

    crowd_file = raw.get("crowd_file")
    external = raw.get("external_consensus_file")
    out_dir = overrides.get("output_dir", raw.get("output_dir", "out"))
    return RunConfig(
        price_files=tuple(price_files),
        questions=tuple(questions),
        sim=sim,
        consensus=consensus,
        crowd_file=(base / crowd_file).resolve() if crowd_file else None,
        external_consensus_file=(base / external).resolve() if external else None,
        output_dir=Path(out_dir) if Path(out_dir).is_absolute() else (base / out_dir),
        workers=int(overrides.get("workers", raw.get("workers", 1))),
    )


@dataclass
class QuestionResult:
    question: Question
    resolution: Resolution
    forecasts: dict[Source, ForecastSeries] = field(default_factory=dict)
    scores: dict[Source, ScoreSeries] = field(default_factory=dict)


@dataclass
class RunReport:
    """Everything one run produced, keyed by question id in sorted order."""

    results: dict[str, QuestionResult]
    errors: dict[str, str]
    mean_curves: dict[str, MeanScoreCurve]
    regression: RegressionResult | None
    warnings: list[str]


def _daily_range(start: dt.date, stop: dt.date) -> list[dt.date]:
    return [start + dt.timedelta(days=i) for i in range((stop - start).days)]


def _clip_series(series: ForecastSeries, start: dt.date, stop: dt.date) -> ForecastSeries:
    points = tuple((d, p) for d, p in series.points if start <= d < stop)
    return ForecastSeries(series.question_id, series.source, points)


def _combined_series(
    rw: ForecastSeries, crowd: ForecastSeries, extremize_a: float
) -> ForecastSeries:
    crowd_map = dict(crowd.points)
    points = tuple(
        (d, combine_logit([p, crowd_map[d]], extremize_a))
        for d, p in rw.points
        if d in crowd_map
    )
    return ForecastSeries(rw.question_id, Source.COMBINED, points)


def _run_question(
    spec: QuestionSpec,
    prices: dict[str, PriceSeries],
    crowd_records: list[CrowdRecord],
    external: dict[str, ForecastSeries],
    sim: SimulationParams,
    consensus: ConsensusParams,
) -> QuestionResult:
    series = prices[spec.pair_id]
    if spec.history_start is not None:
        series = series.window(start=spec.history_start)
    baseline = spec.baseline_rate
    if baseline is None:
        baseline = series.first_rate_on_or_after(spec.open_date)
        if baseline is None:
            raise ValueError(
                f"insufficient data: no observation on or after {spec.open_date}"
            )
    question = Question(
        question_id=spec.question_id,
        pair_id=spec.pair_id,
        open_date=spec.open_date,
        close_date=spec.close_date,
        baseline_rate=baseline,
        threshold_kind=spec.threshold_kind,
        threshold_value=spec.threshold_value,
        scoring_start_date=spec.scoring_start_date,
    )
    resolution = resolve(series, question)
    result = QuestionResult(question=question, resolution=resolution)

    if not spec.non_floating:
        rw = rolling_forecast(series, question, sim)
        if len(rw):
            result.forecasts[Source.RANDOM_WALK] = rw
            result.scores[Source.RANDOM_WALK] = score_series(rw, resolution)

    crowd_fs: ForecastSeries | None = None
    if spec.question_id in external:
        crowd_fs = _clip_series(
            external[spec.question_id], question.scoring_start, resolution.resolve_date
        )
    elif crowd_records:
        sample_dates = _daily_range(question.scoring_start, resolution.resolve_date)
        crowd_fs = crowd_series(crowd_records, question, sample_dates, consensus)
    if crowd_fs is not None and len(crowd_fs):
        result.forecasts[Source.CROWD] = crowd_fs
        result.scores[Source.CROWD] = score_series(crowd_fs, resolution)

    rw_fs = result.forecasts.get(Source.RANDOM_WALK)
    if rw_fs is not None and crowd_fs is not None and len(crowd_fs):
        combined = _combined_series(rw_fs, crowd_fs, consensus.extremize_a)
        if len(combined):
            result.forecasts[Source.COMBINED] = combined
            result.scores[Source.COMBINED] = score_series(combined, resolution)
    return result


def run_pipeline(config: RunConfig) -> RunReport:
    """Resolve, forecast, score, and calibrate every configured question.

    Per-question failures are recorded in the report rather than raised,
    unless every question fails. Results do not depend on the order of
    questions or price files in the config, nor on the worker count.
    """
    warnings: list[str] = []
    prices: dict[str, PriceSeries] = {}
    price_errors: dict[str, str] = {}
    for pf in sorted(config.price_files, key=lambda p: p.pair_id):
        try:
            prices[pf.pair_id] = ingest_price_csv(pf.path, pf.pair_id, pf.quote_direction)
        except (OSError, ValueError) as exc:
            price_errors[pf.pair_id] = str(exc)

    crowd_records: list[CrowdRecord] = []
    if config.crowd_file is not None:
        crowd_records = load_crowd_csv(config.crowd_file)
        if not crowd_records:
            warnings.append(f"crowd file {config.crowd_file} contains no records")
    external: dict[str, ForecastSeries] = {}
    if config.external_consensus_file is not None:
        external = load_consensus_csv(config.external_consensus_file)
        if not external:
            warnings.append(
                f"consensus file {config.external_consensus_file} contains no series"
            )

    specs = sorted(config.questions, key=lambda q: q.question_id)

    def job(spec: QuestionSpec):
        if spec.pair_id in price_errors:
            return spec.question_id, None, price_errors[spec.pair_id]
        try:
            return spec.question_id, _run_question(
                spec, prices, crowd_records, external, config.sim, config.consensus
            ), None
        except ValueError as exc:
            return spec.question_id, None, str(exc)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(job, specs))
    else:
        outcomes = [job(s) for s in specs]

    results: dict[str, QuestionResult] = {}
    errors: dict[str, str] = {}
    for qid, result, error in sorted(outcomes, key=lambda o: o[0]):
        if result is not None:
            results[qid] = result
        else:
            errors[qid] = error
    if not results:
        details = "; ".join(f"{qid}: {msg}" for qid, msg in sorted(errors.items()))
        raise ValueError(f"all questions failed: {details}")

    rw_scores = {
        qid: r.scores[Source.RANDOM_WALK]
        for qid, r in results.items()
        if Source.RANDOM_WALK in r.scores
    }
    crowd_scores = {
        qid: r.scores[Source.CROWD]
        for qid, r in results.items()
        if Source.CROWD in r.scores
    }
    shared = sorted(set(rw_scores) & set(crowd_scores))
    crowd_only = sorted(set(crowd_scores) - set(rw_scores))

    mean_curves: dict[str, MeanScoreCurve] = {}
    if rw_scores:
        mean_curves[RW_CURVE] = mean_score_curve(
            [rw_scores[q] for q in sorted(rw_scores)]
        )
    if shared:
        mean_curves[CROWD_CURVE] = mean_score_curve([crowd_scores[q] for q in shared])
        combined = [
            results[q].scores[Source.COMBINED]
            for q in shared
            if Source.COMBINED in results[q].scores
        ]
        if combined:
            mean_curves[COMBINED_CURVE] = mean_score_curve(combined)
    if crowd_only:
        mean_curves[CROWD_ONLY_CURVE] = mean_score_curve(
            [crowd_scores[q] for q in crowd_only]
        )

    regression: RegressionResult | None = None
    if shared:
        try:
            samples = align_series(
                [results[q].forecasts[Source.RANDOM_WALK] for q in shared],
                [results[q].forecasts[Source.CROWD] for q in shared],
            )
            regression = ols_fit(samples)
        except ValueError as exc:
            warnings.append(f"calibration skipped: {exc}")

    return RunReport(
        results=results,
        errors=errors,
        mean_curves=mean_curves,
        regression=regression,
        warnings=warnings,
    )


def format_regression(result: RegressionResult) -> str:
    """Fixed-format text for the calibration report and CLI."""
    lines = [
        "OLS calibration: random_walk = beta0 + beta1 * crowd",
        "note: classical standard errors on a pooled daily panel; serial",
        "correlation makes them descriptive rather than inferential",
        f"n: {result.n}",
        f"nulls: beta0 = {result.null0:.6f}, beta1 = {result.null1:.6f}",
        f"{'term':<12}{'estimate':>12}{'std_error':>12}{'t_value':>12}{'p_value':>14}",
        (
            f"{'intercept':<12}{result.beta0:>12.6f}{result.se0:>12.6f}"
            f"{result.t0:>12.5f}{result.p0:>14.6g}"
        ),
        (
            f"{'crowd':<12}{result.beta1:>12.6f}{result.se1:>12.6f}"
            f"{result.t1:>12.5f}{result.p1:>14.6g}"
        ),
        f"r_squared: {result.r_squared:.6f}",
    ]
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_report(report: RunReport, output_dir: str | Path) -> list[Path]:
    """Write all report files with fixed 6-decimal formatting.

    Emits forecast_<question>_<source>.csv and scores_<question>_<source>.csv
    per non-empty series, mean_scores_<name>.csv per curve, resolutions.csv
    for every configured question (with any per-question error), and
    calibration.txt when a regression was fitted.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    order = [Source.RANDOM_WALK, Source.CROWD, Source.COMBINED]
    for qid in sorted(report.results):
        result = report.results[qid]
        for source in order:
            fs = result.forecasts.get(source)
            if fs is not None and len(fs):
                path = out / f"forecast_{qid}_{source.value}.csv"
                rows = "".join(f"{d.isoformat()},{p:.6f}\n" for d, p in fs.points)
                _write_text(path, "date,p\n" + rows)
                written.append(path)
            ss = result.scores.get(source)
            if ss is not None and len(ss):
                path = out / f"scores_{qid}_{source.value}.csv"
                rows = "".join(f"{d.isoformat()},{s:.6f}\n" for d, s in ss.points)
                _write_text(path, "date,score\n" + rows)
                written.append(path)

    for name in (RW_CURVE, CROWD_CURVE, COMBINED_CURVE, CROWD_ONLY_CURVE):
        curve = report.mean_curves.get(name)
        if curve is not None and len(curve):
            path = out / f"mean_scores_{name}.csv"
            rows = "".join(
                f"{d.isoformat()},{m:.6f},{n}\n" for d, m, n in curve.points
            )
            _write_text(path, "date,mean_score,n_open\n" + rows)
            written.append(path)

    rows = []
    for qid in sorted(set(report.results) | set(report.errors)):
        if qid in report.results:
            res = report.results[qid].resolution
            rows.append(f"{qid},{res.outcome},{res.resolve_date.isoformat()},\n")
        else:
            msg = report.errors[qid].replace('"', "'")
            rows.append(f'{qid},,,"{msg}"\n')
    path = out / "resolutions.csv"
    _write_text(path, "question_id,outcome,resolve_date,error\n" + "".join(rows))
    written.append(path)

    if report.regression is not None:
        path = out / "calibration.txt"
        _write_text(path, format_regression(report.regression))
        written.append(path)

    return sorted(written)
