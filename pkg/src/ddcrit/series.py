"""Price series ingestion, log-returns and the raw-series statistics.

Conventions used throughout the package:

* excess kurtosis uses population moments (divide by N, biased sigma) minus 3;
* the return standard deviation ``S_r`` is the sample one (N - 1 denominator).
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, ParseError, ZeroVarianceError

KURTOSIS_CONVENTION = "excess kurtosis, population moments (1/N), minus 3"
STDDEV_CONVENTION = "sample standard deviation (N-1)"


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    dates: tuple
    closes: np.ndarray = field(repr=False)

    def __post_init__(self):
        closes = np.array(self.closes, dtype=float)
        closes.setflags(write=False)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if closes.ndim != 1 or len(closes) != len(self.dates):
            raise ValueError("dates and closes must be 1-d and of equal length")
        if len(closes) < 2:
            raise InsufficientDataError(f"{self.symbol}: a series needs at least 2 prices")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            bad = int(np.flatnonzero(~(closes > 0) | ~np.isfinite(closes))[0])
            raise ValueError(f"{self.symbol}: non-positive price at position {bad}")
        for i in range(1, len(self.dates)):
            if not self.dates[i] > self.dates[i - 1]:
                raise ValueError(f"{self.symbol}: dates not strictly increasing at position {i}")

    def __len__(self):
        return len(self.closes)

    def with_closes(self, closes) -> "PriceSeries":
        return PriceSeries(self.symbol, self.dates, closes)


@dataclass(frozen=True)
class ReturnSeries:
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SeriesStats:
    n_returns: int
    stddev: float
    excess_kurtosis: float | None  # None when undefined (zero variance)
    first_date: dt.date
    last_date: dt.date


@dataclass(frozen=True)
class ColumnSchema:
    """Where to find dates and closes in a delimited file.

    Columns may be given by header name or by 0-based position.  With
    ``header=False`` only positions make sense.  ``date_format`` is a
    ``strptime`` pattern; ``None`` means ISO-8601 (``YYYY-MM-DD``).
    Month/day order is never guessed.
    """

    date_column: str | int = "date"
    close_column: str | int = "close"
    date_format: str | None = None
    delimiter: str = ","
    header: bool = True
    sort: bool = True


def _parse_date(raw: str, fmt: str | None) -> dt.date:
    raw = raw.strip()
    if fmt is None:
        return dt.date.fromisoformat(raw[:10])
    return dt.datetime.strptime(raw, fmt).date()


def _column_index(names: list[str], col: str | int, what: str) -> int:
    if isinstance(col, int):
        return col
    stripped = [n.strip() for n in names]
    if col in stripped:
        return stripped.index(col)
    lowered = [n.lower() for n in stripped]
    if col.lower() in lowered:
        return lowered.index(col.lower())
    raise ParseError(f"{what} column {col!r} not found in header {stripped}", line=1)


def parse_price_file(text: str, schema: ColumnSchema = ColumnSchema(), symbol: str = "") -> PriceSeries:
    """Parse delimiter-separated text into a validated :class:`PriceSeries`.

    Rows are sorted by date unless ``schema.sort`` is false, in which case
    out-of-order rows are an error.  Duplicate dates are always rejected.
    Errors carry the 1-based line number of the offending row.
    """
    reader = csv.reader(io.StringIO(text), delimiter=schema.delimiter)
    rows = [(n, r) for n, r in enumerate(reader, start=1) if r and any(c.strip() for c in r)]
    if schema.header:
        if not rows:
            raise ParseError("empty file")
        _, names = rows[0]
        rows = rows[1:]
        di = _column_index(names, schema.date_column, "date")
        ci = _column_index(names, schema.close_column, "close")
    else:
        if not (isinstance(schema.date_column, int) and isinstance(schema.close_column, int)):
            raise ParseError("headerless files need integer column positions")
        di, ci = schema.date_column, schema.close_column

    parsed = []
    for line, row in rows:
        if max(di, ci) >= len(row):
            raise ParseError(f"expected at least {max(di, ci) + 1} fields, got {len(row)}", line)
        try:
            date = _parse_date(row[di], schema.date_format)
        except ValueError as exc:
            raise ParseError(f"bad date {row[di]!r}: {exc}", line) from None
        try:
            close = float(row[ci].strip())
        except ValueError:
            raise ParseError(f"bad close value {row[ci]!r}", line) from None
        if not math.isfinite(close) or close <= 0:
            raise ParseError(f"non-positive price {row[ci].strip()}", line)
        parsed.append((date, close, line))

    if len(parsed) < 2:
        raise ParseError(f"need at least 2 price rows, found {len(parsed)}")

    if schema.sort:
        parsed.sort(key=lambda p: p[0])
    for prev, cur in zip(parsed, parsed[1:]):
        if cur[0] == prev[0]:
            raise ParseError(f"duplicate date {cur[0].isoformat()}", cur[2])
        if cur[0] < prev[0]:
            raise ParseError(f"date {cur[0].isoformat()} out of order", cur[2])

    return PriceSeries(symbol, tuple(p[0] for p in parsed), np.array([p[1] for p in parsed]))


def read_price_file(path, schema: ColumnSchema = ColumnSchema(), symbol: str | None = None) -> PriceSeries:
    from pathlib import Path

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_price_file(text, schema, symbol=symbol if symbol is not None else path.stem)


def log_returns(series: PriceSeries) -> ReturnSeries:
    c = series.closes
    return ReturnSeries(np.log(c[1:] / c[:-1]))


def excess_kurtosis(xs: Sequence[float]) -> float:
    """Fourth standardized central moment minus 3, with population moments.

    A Gaussian sample gives values near 0; the symmetric two-point law gives
    exactly -2.
    """
    x = np.asarray(xs, dtype=float)
    if x.size < 4:
        raise InsufficientDataError(f"kurtosis needs at least 4 points, got {x.size}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("kurtosis undefined for zero variance")
    dev = x - x.mean()
    m2 = np.mean(dev * dev)
    if m2 == 0:
        raise ZeroVarianceError("kurtosis undefined for zero variance")
    m4 = np.mean(dev ** 4)
    return float(m4 / (m2 * m2) - 3.0)


def series_summary(series: PriceSeries) -> SeriesStats:
    r = log_returns(series).values
    std = float(np.std(r, ddof=1)) if len(r) > 1 else 0.0
    try:
        k = excess_kurtosis(r)
    except InsufficientDataError:
        k = None
    return SeriesStats(
        n_returns=len(r),
        stddev=std,
        excess_kurtosis=k,
        first_date=series.dates[0],
        last_date=series.dates[-1],
    )
