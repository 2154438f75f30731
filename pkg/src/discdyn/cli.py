"""Command-line front end: ``discdyn {fit,predict,zipf,simulate,response}``.

Exit codes: 0 success, 1 data-level failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from datetime import timedelta
from pathlib import Path

import numpy as np

from . import identify, ingest, simulate, zipf
from .response_models import FopdtModel, LogisticModel, parse_transfer_function, response

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _read_posts(path: str, input_format: str | None):
    fmt = input_format or ("jsonl" if path.endswith((".jsonl", ".ndjson", ".json")) else "csv")
    try:
        if path == "-":
            source = sys.stdin.buffer.read()
        else:
            source = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        records, skipped = ingest.parse_posts(source, fmt)
    except ingest.InputError as exc:
        raise DataError(str(exc)) from exc
    if skipped:
        print(f"skipped {skipped} malformed row(s)", file=sys.stderr)
    return records


def _model_from_args(args) -> FopdtModel | LogisticModel:
    try:
        if getattr(args, "logistic", False):
            if args.b is None or args.n0 is None or args.K is None:
                raise UsageError("--logistic needs --K, --b and --n0")
            return LogisticModel(args.K, args.b, args.n0, args.time_unit)
        if args.K is None or args.T is None:
            raise UsageError("need --K and --T (and optionally --L)")
        return FopdtModel(args.K, args.T, args.L, args.time_unit)
    except ValueError as exc:
        raise UsageError(f"invalid model: {exc}") from exc


def _add_model_flags(p, logistic=True):
    p.add_argument("--K", type=float, help="gain (total replies)")
    p.add_argument("--T", type=float, help="time constant")
    p.add_argument("--L", type=float, default=0.0, help="dead time (default 0)")
    if logistic:
        p.add_argument("--logistic", action="store_true", help="use the logistic model (--K, --b, --n0)")
        p.add_argument("--b", type=float, help="logistic growth rate per time unit")
        p.add_argument("--n0", type=float, help="logistic initial fraction in (0, 1)")
    p.add_argument("--time-unit", choices=ingest.TIME_UNITS, default="hour")


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


# fit


def _fit_one(series, method, fit_gain, decimals):
    tid = series.thread_id
    try:
        report = identify.fit(series, method, fit_gain=fit_gain)
    except identify.IdentificationError as exc:
        return {"thread_id": tid, "method": method, "error": exc.code, "message": str(exc)}, None
    return {"thread_id": tid, **report.to_dict(decimals)}, report


def cmd_fit(args) -> int:
    methods = list(identify.METHODS) if args.method == "all" else [args.method]
    if args.quiet_window is not None and not args.quiet_window > 0:
        raise UsageError("--quiet-window must be positive")
    fit_gain = {"auto": None, "yes": True, "no": False}[args.fit_gain]
    archive_end = None
    if args.archive_end is not None:
        try:
            archive_end = ingest.parse_timestamp(args.archive_end)
        except ValueError as exc:
            raise UsageError(f"bad --archive-end: {exc}") from exc

    records = _read_posts(args.input, args.input_format)
    quiet = args.quiet_window if args.quiet_window is not None else ingest.DEFAULT_QUIET_WINDOW_HOURS
    quiet_in_unit = quiet * 3600.0 / ingest.SECONDS_PER_UNIT[args.time_unit]
    all_series = ingest.series_from_posts(records, args.time_unit, quiet_in_unit, archive_end)
    all_series.sort(key=lambda s: s.thread_id)

    jobs = [(s, m) for s in all_series for m in methods]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda job: _fit_one(job[0], job[1], fit_gain, args.decimals), jobs))

    n_ok = 0
    with _output(args.out) as out:
        if args.format == "tsv":
            out.write("thread_id\tmethod\tK\tT\tL\trmse\ttransfer_function\terror\n")
        for record, report in results:
            n_ok += report is not None
            if args.format == "json":
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
            else:
                cols = [record["thread_id"], record["method"]]
                cols += [f"{record[k]:.6g}" if k in record else "" for k in ("K", "T", "L", "rmse")]
                cols += [record.get("transfer_function", ""), record.get("error", "")]
                out.write("\t".join(cols) + "\n")

    if args.plot_dir is not None:
        plot_dir = Path(args.plot_dir)
        plot_dir.mkdir(parents=True, exist_ok=True)
        for (series, method), (_, report) in zip(jobs, results):
            if report is None:
                continue
            t, y = identify.observation_points(series)
            fitted = y - report.residuals[:, 1]
            path = plot_dir / f"{_safe_name(series.thread_id)}.{method}.tsv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("t\tobserved\tfitted\n")
                for row in zip(t, y, fitted):
                    fh.write("\t".join(f"{v:.6g}" for v in row) + "\n")
    return EXIT_OK if n_ok else EXIT_DATA


# predict


def _model_from_file(path: str) -> FopdtModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
        first = next(line for line in text.splitlines() if line.strip())
        obj = json.loads(first)
        return FopdtModel(float(obj["K"]), float(obj["T"]), float(obj.get("L", 0.0)), obj.get("time_unit", "hour"))
    except (OSError, StopIteration, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot load model from {path}: {exc}") from exc


def cmd_predict(args) -> int:
    if args.model is not None:
        model = _model_from_file(args.model)
    elif args.transfer_function is not None:
        try:
            model = parse_transfer_function(args.transfer_function, args.time_unit)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        model = _model_from_args(args)
    if any(not math.isfinite(t) or t < 0 for t in args.t):
        raise UsageError("--t values must be finite and >= 0")
    with _output(args.out) as out:
        if args.format == "tsv":
            out.write("t\texpected\trounded\n")
        for t in args.t:
            pred = identify.predict_count_at(model, t)
            if args.format == "json":
                doc = {"t": t, "expected": pred.expected, "rounded": pred.rounded, "time_unit": model.time_unit}
                out.write(json.dumps(doc, ensure_ascii=False) + "\n")
            else:
                out.write(f"{t:g}\t{pred.expected:.2f}\t{pred.rounded}\n")
    return EXIT_OK


# zipf


def cmd_zipf(args) -> int:
    if args.k_min < 1:
        raise UsageError("--k-min must be >= 1")
    records = _read_posts(args.input, args.input_format)
    threads = ingest.group_threads(records)
    hist = zipf.histogram_from_threads(threads, args.count_mode)
    try:
        fit = zipf.fit_power_law(hist, args.k_min)
    except zipf.InsufficientSupportError as exc:
        print(str(exc), file=sys.stderr)
        fit = None
    doc = {"histogram": hist.to_dict(), "fit": None if fit is None else fit.to_dict()}
    if args.prior_k:
        doc["gain_prior"] = {str(k): zipf.gain_prior(hist, k) for k in args.prior_k}
    with _output(args.out) as out:
        if args.format == "json":
            out.write(json.dumps(doc, ensure_ascii=False) + "\n")
        else:
            zipf.write_plot_tsv(hist, fit, out)
    if args.plot is not None:
        with open(args.plot, "w", encoding="utf-8") as fh:
            zipf.write_plot_tsv(hist, fit, fh)
    return EXIT_OK if fit is not None else EXIT_DATA


# simulate


def cmd_simulate(args) -> int:
    if args.n_threads < 1:
        raise UsageError("--n-threads must be >= 1")
    try:
        start = ingest.parse_timestamp(args.start)
    except ValueError as exc:
        raise UsageError(f"bad --start: {exc}") from exc

    if args.zipf_corpus:
        if args.k_max < 1:
            raise UsageError("--k-max must be >= 1")
        threads, _ = simulate.simulate_size_corpus(
            args.zipf_corpus, args.k_max, args.seed, exponent=args.exponent, start=start
        )
    else:
        model = _model_from_args(args)
        if args.horizon is None or not args.horizon > 0:
            raise UsageError("--horizon must be given and positive")
        gap = tuple(args.gap) if args.gap else None
        try:
            simulate.SimulationConfig(model, args.seed, args.horizon, gap)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        threads = simulate.simulate_threads(
            model, args.n_threads, args.seed, args.horizon, gap, start=start, spacing=args.spacing
        )
        span = (args.n_threads - 1) * args.spacing + args.horizon
        end = start + timedelta(seconds=span * ingest.SECONDS_PER_UNIT[model.time_unit])
        print(f"archive_end={ingest.format_timestamp(end)}", file=sys.stderr)

    with _output(args.out) as out:
        ingest.write_posts_csv(threads, out)
    return EXIT_OK


# response


def cmd_response(args) -> int:
    model = _model_from_args(args)
    if not args.grid > 0:
        raise UsageError("--grid must be positive")
    horizon = args.horizon
    if horizon is None:
        if isinstance(model, FopdtModel):
            horizon = model.L + 10 * model.T
        elif model.b > 0:
            horizon = 2 * abs(math.log(model.n0 / (1 - model.n0))) / model.b + 10 / model.b
        else:
            raise UsageError("--horizon is required for a logistic model with b <= 0")
    if not horizon >= args.grid:
        raise UsageError("--horizon must be at least --grid")
    n = int(math.floor(horizon / args.grid + 1e-9))
    t = np.arange(n + 1) * args.grid
    y = response(model, t)
    with _output(args.out) as out:
        if args.format == "json":
            out.write(json.dumps({"t": t.tolist(), "y": np.asarray(y).tolist()}) + "\n")
        else:
            out.write("t\ty\n")
            for ti, yi in zip(t, y):
                out.write(f"{ti:.10g}\t{yi:.6f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="identify a model for every thread in a posts file")
    p.add_argument("input", help="posts file (CSV or JSON-lines), '-' for stdin")
    p.add_argument("--input-format", choices=["csv", "jsonl"])
    p.add_argument("--method", choices=list(identify.METHODS) + ["all"], default="least_squares")
    p.add_argument("--time-unit", choices=ingest.TIME_UNITS, default="hour")
    p.add_argument("--quiet-window", type=float, help="hours without replies that mark steady state (default 72)")
    p.add_argument("--archive-end", help="when observation stopped (default: latest timestamp in the file)")
    p.add_argument("--fit-gain", choices=["auto", "yes", "no"], default="auto",
                   help="least squares: fit K instead of reading it (auto: only for incomplete threads)")
    p.add_argument("--decimals", type=int, default=1, choices=range(0, 7), metavar="{0..6}")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot-dir", help="write t/observed/fitted TSV per thread and method here")
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="expected cumulative replies at given times")
    p.add_argument("--model", help="fit-report JSON (first line used)")
    p.add_argument("--transfer-function", help="e.g. '27.0·e^{-1.0s}/(5.0s+1)'")
    _add_model_flags(p, logistic=False)
    p.add_argument("--t", type=float, nargs="+", action="extend", required=True)
    p.add_argument("--format", choices=["json", "tsv"], default="tsv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("zipf", help="thread-size histogram and power-law fit")
    p.add_argument("input")
    p.add_argument("--input-format", choices=["csv", "jsonl"])
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--count-mode", choices=["all_posts", "replies"], default="all_posts")
    p.add_argument("--prior-k", type=int, nargs="*", help="report P(size >= k) for these k")
    p.add_argument("--plot", help="also write the k/frequency/fitted TSV here")
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_zipf)

    p = sub.add_parser("simulate", help="write synthetic discussions as a posts CSV")
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float)
    p.add_argument("--gap", type=float, nargs=2, metavar=("START", "END"))
    p.add_argument("--n-threads", type=int, default=1)
    p.add_argument("--spacing", type=float, default=0.0, help="start offset between threads, in time units")
    p.add_argument("--start", default=ingest.format_timestamp(simulate.DEFAULT_START))
    p.add_argument("--zipf-corpus", type=int, metavar="N", help="instead: N threads with power-law sizes")
    p.add_argument("--k-max", type=int, default=50)
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("response", help="tabulate a model response on a time grid")
    _add_model_flags(p)
    p.add_argument("--grid", type=float, default=0.1)
    p.add_argument("--horizon", type=float)
    p.add_argument("--format", choices=["json", "tsv"], default="tsv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_response)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(encoding="utf-8")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"discdyn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"discdyn: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
