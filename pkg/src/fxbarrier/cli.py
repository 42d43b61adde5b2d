"""Command-line interface: forecast, run, score, and calibrate subcommands."""

from __future__ import annotations

import argparse
import datetime as dt
import sys
from pathlib import Path

from .calibration import align_series, ols_fit
from .domain import Question, QuoteDirection, Source, ThresholdKind, resolve
from .engine import SimulationParams, StepMode, rolling_forecast
from .io import ingest_price_csv, parse_forecast_csv
from .pipeline import emit_report, format_regression, load_config, run_pipeline
from .scoring import score_series


def _date(text: str) -> dt.date:
    return dt.date.fromisoformat(text)


def _add_question_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prices", required=True, help="price CSV (date,rate)")
    parser.add_argument("--pair-id", default=None, help="defaults to the file stem")
    parser.add_argument(
        "--quote-direction",
        choices=[d.value for d in QuoteDirection],
        default=QuoteDirection.USD_PER_CCY.value,
    )
    parser.add_argument("--question-id", default="question")
    parser.add_argument("--open", dest="open_date", type=_date, required=True)
    parser.add_argument("--close", dest="close_date", type=_date, required=True)
    parser.add_argument(
        "--threshold-kind",
        choices=[k.value for k in ThresholdKind],
        default=ThresholdKind.RELATIVE_DEPRECIATION.value,
    )
    parser.add_argument("--threshold-value", type=float, required=True)
    parser.add_argument(
        "--baseline",
        type=float,
        default=None,
        help="defaults to the first rate on or after the open date",
    )
    parser.add_argument("--scoring-start", type=_date, default=None)
    parser.add_argument("--history-start", type=_date, default=None)


def _build_question(args) -> tuple:
    series = ingest_price_csv(
        args.prices, args.pair_id, QuoteDirection(args.quote_direction)
    )
    if args.history_start is not None:
        series = series.window(start=args.history_start)
    baseline = args.baseline
    if baseline is None:
        baseline = series.first_rate_on_or_after(args.open_date)
        if baseline is None:
            raise ValueError(
                f"insufficient data: no observation on or after {args.open_date}"
            )
    question = Question(
        question_id=args.question_id,
        pair_id=series.pair_id,
        open_date=args.open_date,
        close_date=args.close_date,
        baseline_rate=baseline,
        threshold_kind=ThresholdKind(args.threshold_kind),
        threshold_value=args.threshold_value,
        scoring_start_date=args.scoring_start,
    )
    return series, question


def _cmd_forecast(args) -> int:
    series, question = _build_question(args)
    params = SimulationParams(
        seed=args.seed, n_paths=args.paths, step_mode=StepMode(args.step_mode)
    )
    forecast = rolling_forecast(series, question, params)
    sys.stdout.write("date,p\n")
    for d, p in forecast.points:
        sys.stdout.write(f"{d.isoformat()},{p:.6f}\n")
    return 0


def _cmd_score(args) -> int:
    series, question = _build_question(args)
    resolution = resolve(series, question)
    forecast = parse_forecast_csv(
        args.forecast, question.question_id, Source(args.source)
    )
    kept = tuple(
        (d, p) for d, p in forecast.points if d <= resolution.resolve_date
    )
    dropped = len(forecast) - len(kept)
    if dropped:
        sys.stderr.write(
            f"warning: dropped {dropped} forecast points after resolution "
            f"({resolution.resolve_date})\n"
        )
    scores = score_series(
        type(forecast)(forecast.question_id, forecast.source, kept), resolution
    )
    sys.stdout.write("date,score\n")
    for d, s in scores.points:
        sys.stdout.write(f"{d.isoformat()},{s:.6f}\n")
    return 0


def _cmd_calibrate(args) -> int:
    rw = parse_forecast_csv(args.x_file, "question", Source.RANDOM_WALK)
    crowd = parse_forecast_csv(args.crowd_file, "question", Source.CROWD)
    samples = align_series([rw], [crowd])
    result = ols_fit(samples, null0=args.null0, null1=args.null1)
    sys.stdout.write(format_regression(result))
    return 0


def _cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.paths is not None:
        overrides["n_paths"] = args.paths
    if args.step_mode is not None:
        overrides["step_mode"] = args.step_mode
    if args.out is not None:
        overrides["output_dir"] = Path(args.out).resolve()
    if args.workers is not None:
        overrides["workers"] = args.workers
    config = load_config(args.config, **overrides)
    report = run_pipeline(config)
    for line in report.warnings:
        sys.stderr.write(f"warning: {line}\n")
    written = emit_report(report, config.output_dir)
    for qid in sorted(report.results):
        res = report.results[qid].resolution
        sys.stdout.write(f"{qid}: k={res.outcome} resolved {res.resolve_date}\n")
    for qid in sorted(report.errors):
        sys.stdout.write(f"{qid}: failed ({report.errors[qid]})\n")
    sys.stdout.write(f"wrote {len(written)} files to {config.output_dir}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fxbarrier",
        description=(
            "Forecast barrier-crossing probabilities for exchange rates with a "
            "random-walk Monte Carlo engine, score forecasts with the Brier "
            "rule, and run the full comparison pipeline."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forecast", help="print a rolling forecast for one question")
    _add_question_args(p)
    p.add_argument("--seed", type=int, required=True, help="explicit RNG seed")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument(
        "--step-mode",
        choices=[m.value for m in StepMode],
        default=StepMode.TRADING_DAYS.value,
    )
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--step-mode", choices=[m.value for m in StepMode], default=None)
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("score", help="score an external forecast CSV against prices")
    _add_question_args(p)
    p.add_argument("--forecast", required=True, help="forecast CSV (date,p)")
    p.add_argument(
        "--source", choices=[s.value for s in Source], default=Source.CROWD.value
    )
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("calibrate", help="regress one forecast CSV on another")
    p.add_argument("--x-file", required=True, help="response series CSV (date,p)")
    p.add_argument("--crowd-file", required=True, help="regressor series CSV (date,p)")
    p.add_argument("--null0", type=float, default=0.0)
    p.add_argument("--null1", type=float, default=1.0)
    p.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
