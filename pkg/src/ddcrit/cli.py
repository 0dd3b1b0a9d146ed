"""Command-line interface.

Exit codes: 0 success, 1 data or I/O error, 2 usage error.  Set
``DDCRIT_CONFIG`` to a JSON file of option defaults (keys are the long option
names with dashes replaced by underscores, e.g. ``{"bootstrap": 200}``).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .controls import GbmSpec, Thresholds, gen_gbm, gen_mixture_series, shuffle_returns
from .critical import find_critical
from .drawdowns import WindowSpec, collect_depths, extract_drawdowns
from .errors import AnalysisError
from .report import (FIGURES, AnalysisConfig, analyze_index, default_groups, emit_groups,
                     emit_plot_data, emit_table, group_xmin, load_table1)
from .series import ColumnSchema, PriceSeries, read_price_file

CONFIG_ENV = "DDCRIT_CONFIG"


def _int_or_str(v: str):
    return int(v) if v.isdigit() else v


def _add_schema_args(p):
    g = p.add_argument_group("input columns")
    g.add_argument("--date-column", type=_int_or_str, default="date")
    g.add_argument("--close-column", type=_int_or_str, default="close")
    g.add_argument("--date-format", default=None, help="strptime pattern; ISO-8601 if omitted")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--no-header", action="store_true", help="columns are 0-based positions")


def _add_config_args(p):
    g = p.add_argument_group("analysis")
    g.add_argument("--window-months", type=int, default=6)
    g.add_argument("--window-days", type=int, default=None,
                   help="use a trading-day window of this many observations instead")
    g.add_argument("--warmup", choices=("expanding", "skip"), default="expanding")
    g.add_argument("--depth-unit", choices=("relative", "points"), default="relative")
    g.add_argument("--include-incomplete", action="store_true")
    g.add_argument("--min-segment", type=int, default=20)
    g.add_argument("--min-tail", type=int, default=10)
    g.add_argument("--bootstrap", type=int, default=1000, help="bootstrap trials (0 skips)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--k-sup-min", type=float, default=Thresholds.k_sup_min)
    g.add_argument("--n-min", type=int, default=Thresholds.n_min)
    g.add_argument("--p-min", type=float, default=Thresholds.p_min)
    _add_schema_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddcrit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full analysis of one or more price files")
    p.add_argument("files", nargs="+")
    _add_config_args(p)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--group-map", default=None,
                   help="JSON file: {group: [symbols]} or {symbol: group}; 'default' for the bundled one")
    p.add_argument("--out-dir", default=None,
                   help="write params/series_stats/verdicts (and plot data) here instead of stdout")
    p.add_argument("--plots", action="store_true", help="with --out-dir, also write plot data")

    p = sub.add_parser("table", help="parameter or series-statistics table")
    p.add_argument("files", nargs="*")
    _add_config_args(p)
    p.add_argument("--which", choices=("params", "series_stats"), default="params")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--published", action="store_true",
                   help="tabulate the bundled transcription of the published measurements")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("plot", help="plot data for one figure")
    p.add_argument("file")
    p.add_argument("--figure", choices=FIGURES, required=True)
    _add_config_args(p)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("synth", help="synthetic control series")
    ssub = p.add_subparsers(dest="kind", required=True)
    g = ssub.add_parser("gbm")
    g.add_argument("--n-days", type=int, default=8000)
    g.add_argument("--mu", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=0.01)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--start-price", type=float, default=100.0)
    g.add_argument("-o", "--output", default=None)
    s = ssub.add_parser("shuffle")
    s.add_argument("file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", default=None)
    _add_schema_args(s)
    m = ssub.add_parser("mixture")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("-o", "--output", default=None)

    p = sub.add_parser("sweep-demo", help="print the kurtosis sweep and the selected cutoff")
    p.add_argument("file", nargs="?", help="price file; a seeded mixture series if omitted")
    _add_config_args(p)
    return parser


def _apply_env_defaults(parser: argparse.ArgumentParser) -> None:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return
    defaults = json.loads(Path(path).read_text(encoding="utf-8"))
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**defaults)


def _schema(args) -> ColumnSchema:
    return ColumnSchema(args.date_column, args.close_column, args.date_format,
                        args.delimiter, header=not args.no_header)


def _config(args) -> AnalysisConfig:
    if args.window_days is not None:
        window = WindowSpec("trading_days", args.window_days, args.warmup)
    else:
        window = WindowSpec("calendar_months", args.window_months, args.warmup)
    return AnalysisConfig(
        window=window, depth_unit=args.depth_unit, include_incomplete=args.include_incomplete,
        min_segment=args.min_segment, min_tail=args.min_tail, bootstrap_trials=args.bootstrap,
        master_seed=args.seed, thresholds=Thresholds(args.k_sup_min, args.n_min, args.p_min),
    )


def _write(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _series_csv(series: PriceSeries) -> str:
    lines = ["date,close"]
    lines += [f"{d.isoformat()},{float(c)!r}" for d, c in zip(series.dates, series.closes)]
    return "\n".join(lines) + "\n"


def _load(path, args) -> PriceSeries:
    if not Path(path).is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return read_price_file(path, _schema(args))


def _analyze_many(files, args):
    config = _config(args)
    reports = []
    for f in files:
        try:
            reports.append(analyze_index(_load(f, args), config))
        except (AnalysisError, OSError) as exc:
            print(f"ddcrit: skipping {f}: {exc}", file=sys.stderr)
    if not reports:
        raise AnalysisError("no input could be analyzed")
    return reports


def _load_groups(spec):
    if spec == "default":
        return default_groups()
    raw = json.loads(Path(spec).read_text(encoding="utf-8"))
    if all(isinstance(v, list) for v in raw.values()):
        return {sym: g for g, members in raw.items() for sym in members}
    return raw


def _verdict_table(reports, seed) -> str:
    lines = [f"# ddcrit {__version__} table=verdicts master_seed={seed}",
             "symbol\tlabel\tK_sup\tN_sup\tks_distance\tp_value\tk_sup_min\tn_min\tp_min"]
    for r in reports:
        v = r.verdict
        k = "NA" if v.k_sup is None else f"{v.k_sup:.3f}"
        p = "NA" if v.p_value is None else f"{v.p_value:.3f}"
        t = v.thresholds
        lines.append(f"{r.symbol}\t{v.label}\t{k}\t{v.n_sup}\t{v.ks_distance:.4f}\t{p}\t"
                     f"{t.k_sup_min:g}\t{t.n_min}\t{t.p_min:g}")
    return "\n".join(lines) + "\n"


def _cmd_analyze(args) -> int:
    reports = _analyze_many(args.files, args)
    params = emit_table(reports, "params", args.format)
    stats = emit_table(reports, "series_stats", args.format)
    verdicts = _verdict_table(reports, args.seed)
    groups = None
    if args.group_map:
        groups = emit_groups(group_xmin(reports, _load_groups(args.group_map)))
    if args.out_dir is None:
        sys.stdout.write(params + "\n" + verdicts)
        if groups:
            sys.stdout.write("\n" + groups)
        return 0
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "json" if args.format == "json" else "tsv"
    (out / f"params.{ext}").write_text(params, encoding="utf-8")
    (out / f"series_stats.{ext}").write_text(stats, encoding="utf-8")
    (out / "verdicts.tsv").write_text(verdicts, encoding="utf-8")
    if groups:
        (out / "groups.tsv").write_text(groups, encoding="utf-8")
    if args.plots:
        for r in reports:
            safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in r.symbol)
            for fig in FIGURES:
                (out / f"{safe}.{fig}.tsv").write_text(emit_plot_data(r, fig), encoding="utf-8")
    return 0


def _cmd_table(args) -> int:
    if args.published:
        rows, _ = load_table1()
        if args.which != "params":
            raise AnalysisError("--published supports only --which params")
        _write(emit_table(rows, "params", args.format), args.output)
        return 0
    if not args.files:
        raise AnalysisError("table needs price files (or --published)")
    _write(emit_table(_analyze_many(args.files, args), args.which, args.format), args.output)
    return 0


def _cmd_plot(args) -> int:
    report = analyze_index(_load(args.file, args), _config(args))
    _write(emit_plot_data(report, args.figure), args.output)
    return 0


def _cmd_synth(args) -> int:
    if args.kind == "gbm":
        series = gen_gbm(GbmSpec(args.n_days, args.mu, args.sigma, args.seed, args.start_price))
    elif args.kind == "shuffle":
        series = shuffle_returns(_load(args.file, args), args.seed)
    else:
        series, _ = gen_mixture_series(args.seed)
    _write(_series_csv(series), args.output)
    return 0


def _cmd_sweep_demo(args) -> int:
    config = _config(args)
    series = _load(args.file, args) if args.file else gen_mixture_series(args.seed)[0]
    _, _, events = extract_drawdowns(series, config.window)
    dset = collect_depths(events, config.depth_unit, config.include_incomplete)
    sweep, split = find_critical(dset, config.min_segment, config.min_tail)
    lines = [f"# ddcrit {__version__} sweep symbol={series.symbol} master_seed={args.seed} "
             f"x_min={split.x_min:.6g} N_sup={split.n_sup} K_inf={split.k_inf:.3f}",
             "cutoff\tn_inferior\tk_inferior\tselected"]
    lines += [f"{p.cutoff_value:.6g}\t{p.n_inferior}\t{p.k_inferior:.4f}\t{int(p.cutoff_value == split.x_min)}"
              for p in sweep]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


COMMANDS = {"analyze": _cmd_analyze, "table": _cmd_table, "plot": _cmd_plot,
            "synth": _cmd_synth, "sweep-demo": _cmd_sweep_demo}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        _apply_env_defaults(parser)
    except (OSError, ValueError) as exc:
        print(f"ddcrit: bad {CONFIG_ENV}: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (AnalysisError, OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ddcrit: error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
