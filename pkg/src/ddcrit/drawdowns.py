"""Trailing ceiling, difference curve and draw-down segmentation."""
from __future__ import annotations

import calendar
import datetime as dt
from collections import deque
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InsufficientDataError
from .series import PriceSeries

TRADING_DAYS_PER_6M = 126


@dataclass(frozen=True)
class WindowSpec:
    """Look-back window of the trailing ceiling.

    ``calendar_months`` covers the half-open interval
    ``(date - span months, date]``; ``trading_days`` covers the last ``span``
    observations including the current one.  With ``warmup="skip"`` the
    ceiling is NaN until the history is long enough to fill one window.
    """

    mode: Literal["calendar_months", "trading_days"] = "calendar_months"
    span: int = 6
    warmup: Literal["expanding", "skip"] = "expanding"

    def __post_init__(self):
        if self.span < 1:
            raise ValueError("window span must be >= 1")
        if self.mode not in ("calendar_months", "trading_days"):
            raise ValueError(f"unknown window mode {self.mode!r}")
        if self.warmup not in ("expanding", "skip"):
            raise ValueError(f"unknown warmup {self.warmup!r}")


@dataclass(frozen=True)
class DrawdownEvent:
    start_index: int
    trough_index: int
    end_index: int
    depth_points: float
    depth_rel: float
    complete: bool


@dataclass(frozen=True)
class DrawdownSet:
    magnitudes: np.ndarray  # descending
    unit: Literal["relative", "points"] = "relative"

    @property
    def n_total(self) -> int:
        return len(self.magnitudes)

    @property
    def x_max(self) -> float:
        if not len(self.magnitudes):
            raise InsufficientDataError("empty draw-down set has no maximum")
        return float(self.magnitudes[0])


def months_before(d: dt.date, months: int) -> dt.date:
    """Same day-of-month ``months`` earlier, clamped to the month's length."""
    total = d.year * 12 + (d.month - 1) - months
    year, month = divmod(total, 12)
    month += 1
    return dt.date(year, month, min(d.day, calendar.monthrange(year, month)[1]))


def window_starts(series: PriceSeries, window: WindowSpec) -> tuple[np.ndarray, np.ndarray]:
    """First index inside each day's window, and whether that window is full."""
    n = len(series)
    idx = np.arange(n)
    if window.mode == "trading_days":
        lo = np.maximum(idx - window.span + 1, 0)
        full = idx >= window.span - 1
        return lo, full
    lo = np.empty(n, dtype=int)
    full = np.empty(n, dtype=bool)
    dates = series.dates
    j = 0
    for i in range(n):
        start = months_before(dates[i], window.span)
        while dates[j] <= start:
            j += 1
        lo[i] = j
        full[i] = dates[0] <= start
    return lo, full


def trailing_max(series: PriceSeries, window: WindowSpec = WindowSpec()) -> np.ndarray:
    """Maximum close over the window ending at (and including) each day.

    Monotone-deque sliding maximum, O(n).  Because the current day is in its
    own window, ``closes[i] <= ceiling[i]`` holds everywhere it is defined.
    """
    closes = series.closes
    lo, full = window_starts(series, window)
    out = np.empty(len(closes))
    dq: deque[int] = deque()
    for i, c in enumerate(closes):
        while dq and closes[dq[-1]] <= c:
            dq.pop()
        dq.append(i)
        while dq[0] < lo[i]:
            dq.popleft()
        out[i] = closes[dq[0]]
    if window.warmup == "skip":
        out[~full] = np.nan
    return out


def drawdown_curve(series: PriceSeries, ceiling) -> np.ndarray:
    ceiling = np.asarray(ceiling, dtype=float)
    if ceiling.shape != series.closes.shape:
        raise ValueError(f"length mismatch: {len(series)} closes vs {len(ceiling)} ceiling values")
    return series.closes - ceiling


def segment_drawdowns(d, series: PriceSeries, ceiling) -> list[DrawdownEvent]:
    """Split the difference curve into maximal runs of strictly negative values.

    ``start_index`` is the zero preceding the run and ``end_index`` the zero
    that closes it.  A run cut off by the end of the data, or one with no
    preceding zero (possible when the warm-up is skipped), is marked
    incomplete and its missing boundary falls back to the run's own edge.
    NaN entries (undefined ceiling) never belong to an event.
    """
    d = np.asarray(d, dtype=float)
    ceiling = np.asarray(ceiling, dtype=float)
    if len(d) != len(series) or len(ceiling) != len(series):
        raise ValueError("d, series and ceiling must be aligned")
    neg = d < 0
    if not neg.any():
        return []
    edges = np.diff(np.concatenate(([0], neg.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)  # one past the run
    events = []
    n = len(d)
    for a, b in zip(starts, stops):
        seg = d[a:b]
        t = a + int(np.argmin(seg))
        has_left = a > 0 and d[a - 1] == 0
        has_right = b < n and d[b] == 0
        depth = float(d[t])
        events.append(DrawdownEvent(
            start_index=int(a - 1) if has_left else int(a),
            trough_index=t,
            end_index=int(b) if has_right else int(b - 1),
            depth_points=depth,
            depth_rel=depth / float(ceiling[t]),
            complete=bool(has_left and has_right),
        ))
    return events


def collect_depths(events, unit: Literal["relative", "points"] = "relative",
                   include_incomplete: bool = False) -> DrawdownSet:
    if unit not in ("relative", "points"):
        raise ValueError(f"unknown depth unit {unit!r}")
    attr = "depth_rel" if unit == "relative" else "depth_points"
    mags = np.array([abs(getattr(e, attr)) for e in events if include_incomplete or e.complete], dtype=float)
    # stable descending sort: ties keep event order
    order = np.argsort(-mags, kind="stable")
    return DrawdownSet(mags[order], unit)


def rank_size_points(dset: DrawdownSet) -> list[tuple[int, float]]:
    if dset.n_total == 0:
        raise InsufficientDataError("rank-size plot of an empty draw-down set")
    return [(r, float(m)) for r, m in enumerate(dset.magnitudes, start=1)]


def extract_drawdowns(series: PriceSeries, window: WindowSpec = WindowSpec()):
    """Convenience: ceiling, difference curve and events in one call."""
    ceiling = trailing_max(series, window)
    d = drawdown_curve(series, ceiling)
    return ceiling, d, segment_drawdowns(d, series, ceiling)
