"""Per-series pipeline, Table-1/Table-2 shaped output, group means and plot data."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable, Literal, Sequence

import numpy as np

from . import __version__
from .controls import RegimeVerdict, Thresholds, classify_regime
from .critical import (DEFAULT_MIN_SEGMENT, DEFAULT_MIN_TAIL, CriticalSplit, SweepPoint,
                       kurtosis_sweep, select_critical)
from .drawdowns import (DrawdownEvent, DrawdownSet, WindowSpec, collect_depths, drawdown_curve,
                        rank_size_points, segment_drawdowns, trailing_max)
from .errors import AnalysisError, InsufficientDataError
from .powerlaw import PowerLawFit, PowerRegression, bootstrap_pvalue, fit_power_law, rank_size_regression
from .series import KURTOSIS_CONVENTION, STDDEV_CONVENTION, PriceSeries, SeriesStats, series_summary


@dataclass(frozen=True)
class AnalysisConfig:
    window: WindowSpec = WindowSpec()
    depth_unit: Literal["relative", "points"] = "relative"
    include_incomplete: bool = False
    min_segment: int = DEFAULT_MIN_SEGMENT
    min_tail: int = DEFAULT_MIN_TAIL
    bootstrap_trials: int = 1000
    master_seed: int = 0
    thresholds: Thresholds = Thresholds()

    def __post_init__(self):
        if self.min_segment < 4:
            raise ValueError("min_segment must be >= 4")
        if self.min_tail < 2:
            raise ValueError("min_tail must be >= 2")
        if self.bootstrap_trials < 0:
            raise ValueError("bootstrap_trials must be >= 0")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if self.depth_unit not in ("relative", "points"):
            raise ValueError(f"unknown depth unit {self.depth_unit!r}")

    def describe(self) -> str:
        w = self.window
        return (f"window={w.mode}:{w.span}:{w.warmup} depth_unit={self.depth_unit} "
                f"include_incomplete={self.include_incomplete} min_segment={self.min_segment} "
                f"min_tail={self.min_tail} bootstrap={self.bootstrap_trials}")


PARAM_COLUMNS = ("N_tot", "N_sup", "N_inf", "%Sup", "K_tot", "K_sup", "K_inf",
                 "x_Max", "x_min", "R2", "alpha", "sigma")
STATS_COLUMNS = ("N_r", "S_r", "K_r", "first_date", "last_date")


@dataclass(frozen=True)
class ParamsRow:
    """The twelve per-series parameters, columns a through l.

    ``x_max``/``x_min`` are signed (negative) and, in relative units, in
    percent, as printed in the published table.  ``pct_sup`` is in percent.
    """

    symbol: str
    n_tot: int
    n_sup: int
    n_inf: int
    pct_sup: float
    k_tot: float | None
    k_sup: float | None
    k_inf: float | None
    x_max: float
    x_min: float
    r2: float
    alpha: float
    sigma: float
    unit: str = "relative"

    def values(self) -> tuple:
        return (self.n_tot, self.n_sup, self.n_inf, self.pct_sup, self.k_tot, self.k_sup,
                self.k_inf, self.x_max, self.x_min, self.r2, self.alpha, self.sigma)


@dataclass(frozen=True)
class IndexReport:
    symbol: str
    config: AnalysisConfig
    series: PriceSeries = field(repr=False)
    series_stats: SeriesStats
    ceiling: np.ndarray = field(repr=False)
    curve: np.ndarray = field(repr=False)
    events: tuple[DrawdownEvent, ...] = field(repr=False)
    depths: DrawdownSet = field(repr=False)
    sweep: tuple[SweepPoint, ...] = field(repr=False)
    split: CriticalSplit
    fit: PowerLawFit
    regression: PowerRegression
    verdict: RegimeVerdict | None = None

    @property
    def tail(self) -> np.ndarray:
        return self.depths.magnitudes[: self.split.n_sup]

    def params(self) -> ParamsRow:
        scale = 100.0 if self.config.depth_unit == "relative" else 1.0
        s = self.split
        return ParamsRow(
            symbol=self.symbol, n_tot=s.n_total, n_sup=s.n_sup, n_inf=s.n_inf,
            pct_sup=100.0 * s.pct_sup, k_tot=s.k_tot, k_sup=s.k_sup, k_inf=s.k_inf,
            x_max=-scale * s.x_max, x_min=-scale * s.x_min,
            r2=self.regression.r_squared, alpha=self.fit.alpha, sigma=self.fit.sigma,
            unit=self.config.depth_unit,
        )


def analyze_index(series: PriceSeries, config: AnalysisConfig = AnalysisConfig()) -> IndexReport:
    """Run the full pipeline on one series.

    Failures are re-raised as :class:`AnalysisError` prefixed with the symbol.
    """
    try:
        stats = series_summary(series)
        ceiling = trailing_max(series, config.window)
        curve = drawdown_curve(series, ceiling)
        events = segment_drawdowns(curve, series, ceiling)
        depths = collect_depths(events, config.depth_unit, config.include_incomplete)
        if depths.n_total == 0:
            raise InsufficientDataError("zero draw-downs")
        sweep = kurtosis_sweep(depths, config.min_segment)
        split = select_critical(sweep, depths, config.min_tail)
        tail = depths.magnitudes[: split.n_sup]
        fit = fit_power_law(tail, split.x_min)
        if config.bootstrap_trials:
            p = bootstrap_pvalue(tail, fit, config.bootstrap_trials, config.master_seed,
                                 n_total=depths.n_total)
            fit = replace(fit, p_value=p)
        regression = rank_size_regression(rank_size_points(DrawdownSet(tail, depths.unit)))
    except AnalysisError as exc:
        raise type(exc)(f"{series.symbol}: {exc}") from exc
    except (ValueError, ZeroDivisionError) as exc:
        raise AnalysisError(f"{series.symbol}: {exc}") from exc
    report = IndexReport(series.symbol, config, series, stats, ceiling, curve, tuple(events),
                         depths, tuple(sweep), split, fit, regression)
    return replace(report, verdict=classify_regime(report, config.thresholds))


# ---------------------------------------------------------------- formatting

def _fmt(x, spec: str) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return format(x, spec)


def _param_cells(row: ParamsRow) -> list[str]:
    pct = "%" if row.unit == "relative" else ""
    return [
        str(row.n_tot), str(row.n_sup), str(row.n_inf),
        _fmt(row.pct_sup, ".2f") + "%",
        _fmt(row.k_tot, ".3f"), _fmt(row.k_sup, ".3f"), _fmt(row.k_inf, ".3f"),
        _fmt(row.x_max, ".2f") + pct, _fmt(row.x_min, ".2f") + pct,
        _fmt(row.r2, ".4f"), _fmt(row.alpha, ".3f"), _fmt(row.sigma, ".3f"),
    ]


def _stats_cells(stats: SeriesStats) -> list[str]:
    return [str(stats.n_returns), _fmt(100.0 * stats.stddev, ".3f") + "%",
            _fmt(stats.excess_kurtosis, ".3f"), stats.first_date.isoformat(), stats.last_date.isoformat()]


def _cell_value(cell: str):
    if cell in ("", "NA"):
        return None
    return float(cell.rstrip("%").replace(",", ""))


def _decimals(cell: str) -> int:
    c = cell.rstrip("%")
    return len(c.split(".")[1]) if "." in c else 0


def summary_rows(body: Sequence[Sequence[str]]) -> list[list[str]]:
    """AVERAGE, MAX and MIN rows computed from already formatted body cells.

    Each column keeps its printed precision and unit suffix; count columns
    average to the nearest integer.  Columns without numbers stay blank.
    """
    out = {"AVERAGE": [], "MAX": [], "MIN": []}
    for j in range(len(body[0])):
        cells = [r[j] for r in body]
        numeric = [c for c in cells if c != "NA"]
        if not numeric or not all(_is_number(c) for c in numeric):
            for k in out:
                out[k].append("")
            continue
        vals = [_cell_value(c) for c in numeric]
        dec = _decimals(numeric[0])
        suffix = "%" if numeric[0].endswith("%") else ""
        for k, v in (("AVERAGE", sum(vals) / len(vals)), ("MAX", max(vals)), ("MIN", min(vals))):
            out[k].append(f"{v:.{dec}f}{suffix}")
    return [[k] + cells for k, cells in out.items()]


def _is_number(cell: str) -> bool:
    try:
        float(cell.rstrip("%").replace(",", ""))
    except ValueError:
        return False
    return True


def _header_lines(which: str, config: AnalysisConfig | None) -> list[str]:
    lines = [f"ddcrit {__version__} table={which}"]
    if config is not None:
        lines.append(f"master_seed={config.master_seed} {config.describe()}")
    lines.append(f"kurtosis: {KURTOSIS_CONVENTION}; S_r: {STDDEV_CONVENTION}")
    return lines


def emit_table(reports: Sequence, which: Literal["params", "series_stats"] = "params",
               format: Literal["tsv", "json"] = "tsv") -> str:
    """Render reports as a table with AVERAGE/MAX/MIN rows appended.

    ``reports`` holds :class:`IndexReport` objects, or bare :class:`ParamsRow`
    objects for the parameters table.  Precision: percentages 2 decimals,
    kurtoses and the exponent and its error 3, R^2 4, S_r 3 (in percent).
    """
    if not reports:
        raise ValueError("no reports to tabulate")
    config = next((r.config for r in reports if isinstance(r, IndexReport)), None)
    if which == "params":
        columns = PARAM_COLUMNS
        rows = [r.params() if isinstance(r, IndexReport) else r for r in reports]
        body = [[r.symbol] + _param_cells(r) for r in rows]
    elif which == "series_stats":
        columns = STATS_COLUMNS
        body = [[r.symbol] + _stats_cells(r.series_stats) for r in reports]
    else:
        raise ValueError(f"unknown table {which!r}")
    summary = summary_rows([b[1:] for b in body])
    header = _header_lines(which, config)

    if format == "tsv":
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        for h in header:
            buf.write(f"# {h}\n")
        w.writerow(("symbol",) + columns)
        w.writerows(body)
        w.writerows(summary)
        return buf.getvalue()
    if format == "json":
        def record(cells):
            return {"symbol": cells[0], **{c: (_cell_value(v) if v == "NA" or _is_number(v) else v)
                                           for c, v in zip(columns, cells[1:])}}
        doc = {"header": header, "columns": list(columns),
               "rows": [record(b) for b in body], "summary": [record(s) for s in summary]}
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {format!r}")


def parse_table(text: str) -> tuple[list[str], list[list[str]], list[list[str]]]:
    """Split emitted TSV (or the bundled fixture) into header, body and summary rows."""
    rows = [r for r in csv.reader(io.StringIO(text), delimiter="\t") if r and not r[0].startswith("#")]
    header, rest = rows[0], rows[1:]
    body = [r for r in rest if r[0] not in ("AVERAGE", "MAX", "MIN")]
    summary = [r for r in rest if r[0] in ("AVERAGE", "MAX", "MIN")]
    return header, body, summary


# ---------------------------------------------------------------- fixtures & groups

def _data_text(name: str) -> str:
    return resources.files("ddcrit").joinpath("data", name).read_text(encoding="utf-8")


def load_table1() -> tuple[list[ParamsRow], list[list[str]]]:
    """Published per-index parameters as :class:`ParamsRow` plus the printed summary rows."""
    _, body, summary = parse_table(_data_text("table1.tsv"))
    rows = []
    for r in body:
        v = [_cell_value(c) for c in r[1:]]
        rows.append(ParamsRow(r[0], int(v[0]), int(v[1]), int(v[2]), *v[3:]))
    return rows, summary


def load_table1_text() -> str:
    return _data_text("table1.tsv")


def load_table2_text() -> str:
    return _data_text("table2.tsv")


def default_groups() -> dict[str, str]:
    groups = json.loads(_data_text("groups.json"))
    return {sym: g for g, members in groups.items() for sym in members}


@dataclass(frozen=True)
class GroupSummary:
    group: str
    members: tuple[str, ...]
    mean_x_min: float


def group_xmin(reports: Iterable, grouping: dict[str, str]) -> list[GroupSummary]:
    """Arithmetic mean of the signed critical level per group, in first-seen group order."""
    acc: dict[str, list] = {}
    for r in reports:
        row = r.params() if isinstance(r, IndexReport) else r
        if row.symbol not in grouping:
            raise KeyError(f"symbol {row.symbol!r} has no group")
        acc.setdefault(grouping[row.symbol], []).append(row)
    return [GroupSummary(g, tuple(r.symbol for r in rows), float(np.mean([r.x_min for r in rows])))
            for g, rows in acc.items()]


def emit_groups(summaries: Sequence[GroupSummary]) -> str:
    lines = ["group\tn\tmean_x_min\tmembers"]
    for s in summaries:
        lines.append(f"{s.group}\t{len(s.members)}\t{s.mean_x_min:.3f}\t{','.join(s.members)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- plot data

FIGURES = ("ceiling_curves", "dd_curve", "rank_scatter", "tail_fit")


def _num(x: float) -> str:
    return "NA" if math.isnan(x) else format(float(x), ".10g")


def emit_plot_data(report: IndexReport, figure: str) -> str:
    """Tab-separated columns for one figure.

    ``rank_scatter`` flags the critical point (rank ``N_sup``, whose magnitude
    is ``x_min``) with ``critical=1``.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    lines = [f"# ddcrit {__version__} figure={figure} symbol={report.symbol} "
             f"master_seed={report.config.master_seed}"]
    s = report.series
    if figure == "ceiling_curves":
        lines.append("date\tclose\tceiling")
        lines += [f"{d.isoformat()}\t{_num(c)}\t{_num(m)}"
                  for d, c, m in zip(s.dates, s.closes, report.ceiling)]
    elif figure == "dd_curve":
        lines.append("date\td")
        lines += [f"{d.isoformat()}\t{_num(v)}" for d, v in zip(s.dates, report.curve)]
    elif figure == "rank_scatter":
        lines.append("rank\tmagnitude\tcritical")
        n_sup = report.split.n_sup
        lines += [f"{r}\t{_num(m)}\t{int(r == n_sup)}"
                  for r, m in rank_size_points(report.depths)]
    else:
        lines.append("rank\tmagnitude\tprediction")
        tail = report.tail
        ranks = np.arange(1, len(tail) + 1)
        pred = report.regression.predict(ranks)
        lines += [f"{r}\t{_num(m)}\t{_num(p)}" for r, m, p in zip(ranks, tail, pred)]
    return "\n".join(lines) + "\n"
