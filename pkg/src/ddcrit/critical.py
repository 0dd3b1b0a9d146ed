"""Kurtosis sweep and selection of the critical draw-down level."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .drawdowns import DrawdownSet
from .errors import InsufficientDataError
from .series import excess_kurtosis

DEFAULT_MIN_SEGMENT = 20
DEFAULT_MIN_TAIL = 10


@dataclass(frozen=True)
class SweepPoint:
    cutoff_value: float
    n_inferior: int
    k_inferior: float


@dataclass(frozen=True)
class CriticalSplit:
    x_min: float
    n_total: int
    n_sup: int
    n_inf: int
    k_tot: float | None
    k_sup: float | None
    k_inf: float
    x_max: float

    def __post_init__(self):
        if self.n_sup + self.n_inf != self.n_total:
            raise ValueError("segment counts do not add up")
        if not self.x_max >= self.x_min > 0:
            raise ValueError("need x_max >= x_min > 0")

    @property
    def pct_sup(self) -> float:
        return self.n_sup / self.n_total


def _kurtosis_or_none(x):
    try:
        return excess_kurtosis(x)
    except InsufficientDataError:
        return None


def kurtosis_sweep(dset: DrawdownSet, min_segment: int = DEFAULT_MIN_SEGMENT) -> list[SweepPoint]:
    """Excess kurtosis of the set of magnitudes strictly below each candidate cutoff.

    Candidates are the distinct observed magnitudes in ascending order; a
    candidate is kept only when at least ``min_segment`` magnitudes lie below
    it and they are not all equal.
    """
    if min_segment < 4:
        raise ValueError("min_segment must be >= 4")
    asc = np.sort(np.asarray(dset.magnitudes, dtype=float))
    values, first = np.unique(asc, return_index=True)
    points = []
    for v, n_inf in zip(values, first):
        if n_inf < min_segment:
            continue
        below = asc[:n_inf]
        if below[0] == below[-1]:
            continue
        points.append(SweepPoint(float(v), int(n_inf), excess_kurtosis(below)))
    if not points:
        raise InsufficientDataError(
            f"no evaluable cutoff: {len(asc)} magnitudes with min_segment={min_segment}")
    return points


def select_critical(sweep: list[SweepPoint], dset: DrawdownSet,
                    min_tail: int = DEFAULT_MIN_TAIL) -> CriticalSplit:
    """Pick the cutoff whose inferior set has excess kurtosis closest to zero.

    Only cutoffs leaving at least ``min_tail`` magnitudes at or above them are
    eligible.  Ties go to the larger inferior set, then the smaller cutoff.
    The cutoff magnitude itself belongs to the superior segment.
    """
    if not sweep:
        raise InsufficientDataError("empty sweep")
    if min_tail < 1:
        raise ValueError("min_tail must be >= 1")
    mags = np.asarray(dset.magnitudes, dtype=float)
    n = len(mags)
    eligible = [p for p in sweep if n - p.n_inferior >= min_tail]
    if not eligible:
        raise InsufficientDataError(
            f"no cutoff leaves {min_tail} draw-downs in the tail (N={n})")
    best = min(eligible, key=lambda p: (abs(p.k_inferior), -p.n_inferior, p.cutoff_value))
    x_min = best.cutoff_value
    sup = mags[mags >= x_min]
    return CriticalSplit(
        x_min=x_min,
        n_total=n,
        n_sup=len(sup),
        n_inf=n - len(sup),
        k_tot=_kurtosis_or_none(mags),
        k_sup=_kurtosis_or_none(sup),
        k_inf=best.k_inferior,
        x_max=float(mags.max()),
    )


def find_critical(dset: DrawdownSet, min_segment: int = DEFAULT_MIN_SEGMENT,
                  min_tail: int = DEFAULT_MIN_TAIL) -> tuple[list[SweepPoint], CriticalSplit]:
    sweep = kurtosis_sweep(dset, min_segment)
    return sweep, select_critical(sweep, dset, min_tail)


SPLIT_COLUMNS = ("N_tot", "N_sup", "N_inf", "%Sup", "K_tot", "K_sup", "K_inf", "x_Max", "x_min")


def split_report(split: CriticalSplit) -> dict:
    """The nine split statistics in table column order (a through i)."""
    return dict(zip(SPLIT_COLUMNS, (
        split.n_total, split.n_sup, split.n_inf, split.pct_sup,
        split.k_tot, split.k_sup, split.k_inf, split.x_max, split.x_min,
    )))
