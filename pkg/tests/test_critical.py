import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddcrit.controls import mixture_depths
from ddcrit.critical import (CriticalSplit, find_critical, kurtosis_sweep, select_critical,
                             split_report)
from ddcrit.drawdowns import DrawdownSet
from ddcrit.errors import InsufficientDataError
from ddcrit.report import load_table1
from ddcrit.series import excess_kurtosis


def dset(values):
    return DrawdownSet(np.sort(np.asarray(values, dtype=float))[::-1])


def half_normal(seed, n=500):
    return np.abs(np.random.default_rng(seed).normal(0, 0.02, n))


def test_size_gate():
    with pytest.raises(InsufficientDataError):
        kurtosis_sweep(dset([0.1, 0.2, 0.3]), min_segment=4)
    with pytest.raises(ValueError):
        kurtosis_sweep(dset(half_normal(0)), min_segment=3)


def test_sweep_against_direct_definition():
    x = half_normal(1, 60)
    sweep = kurtosis_sweep(dset(x), min_segment=10)
    asc = np.sort(x)
    assert [p.cutoff_value for p in sweep] == list(asc[10:])
    for p in sweep:
        below = x[x < p.cutoff_value]
        assert p.n_inferior == len(below)
        assert p.k_inferior == pytest.approx(excess_kurtosis(below), rel=1e-12)


def test_sweep_skips_repeated_magnitudes():
    x = [0.001, 0.002, 0.003, 0.004, 0.005] + [0.02] * 30 + list(np.linspace(0.03, 0.3, 30))
    sweep = kurtosis_sweep(dset(x), min_segment=4)
    cutoffs = [p.cutoff_value for p in sweep]
    assert len(cutoffs) == len(set(cutoffs))
    assert next(p for p in sweep if p.cutoff_value == 0.02).n_inferior == 5
    assert next(p for p in sweep if p.cutoff_value == 0.03).n_inferior == 35


def test_sweep_skips_constant_inferior_sets():
    x = [0.01] * 5 + list(np.linspace(0.02, 0.3, 30))
    sweep = kurtosis_sweep(dset(x), min_segment=4)
    assert sweep[0].cutoff_value > 0.02


@pytest.mark.parametrize("seed", range(5))
def test_half_normal_sweep_crosses_zero(seed):
    k = np.array([p.k_inferior for p in kurtosis_sweep(dset(half_normal(seed)))])
    assert k.min() < 0 < k.max()


def test_sweep_depends_only_on_multiset():
    x = half_normal(2)
    perm = np.random.default_rng(0).permutation(x)
    a = kurtosis_sweep(DrawdownSet(x))
    b = kurtosis_sweep(DrawdownSet(perm))
    assert a == b


def _half_normal_k_inf(seeds, min_tail):
    out = []
    for seed in seeds:
        d = dset(half_normal(seed))
        out.append(select_critical(kurtosis_sweep(d), d, min_tail).k_inf)
    return np.abs(out)


def test_half_normal_selection_near_zero():
    # published K_inf column spans -0.295 .. 0.151; a Gaussian-like body
    # reaches zero only once nearly all of it is included, so no tail floor
    k = _half_normal_k_inf(range(200), min_tail=1)
    assert np.mean(k <= 0.15) >= 0.95


@pytest.mark.xfail(strict=True, reason=(
    "with the default 10-point tail floor the zero crossing of a pure half-normal "
    "sweep is usually out of reach; about a third of seeds reach |K_inf| <= 0.15"))
def test_half_normal_selection_near_zero_default_tail_floor():
    assert np.mean(_half_normal_k_inf(range(200), min_tail=10) <= 0.15) >= 0.95


def _graft_hits(seeds):
    hits = 0
    for seed in seeds:
        depths, graft = mixture_depths(np.random.default_rng(seed))
        _, split = find_critical(dset(depths))
        hits += abs(split.x_min / graft - 1) <= 0.25
    return hits


@pytest.mark.xfail(strict=True, reason=(
    "a half-normal body cut at its 95th percentile has excess kurtosis near -0.5, "
    "so the zero crossing lands inside the grafted tail (about 1.4-2x the graft point)"))
def test_mixture_cutoff_near_graft_point():
    assert _graft_hits(range(100)) >= 90


def test_mixture_cutoff_sits_above_graft_point():
    # measured behaviour behind the xfail above: the selected level overshoots the graft
    ratios = []
    for seed in range(100):
        depths, graft = mixture_depths(np.random.default_rng(seed))
        _, split = find_critical(dset(depths))
        ratios.append(split.x_min / graft)
    assert np.median(ratios) > 1.25
    assert np.mean(np.array(ratios) >= 0.75) >= 0.9


def test_min_tail_larger_than_set():
    d = dset(half_normal(3, 100))
    with pytest.raises(InsufficientDataError):
        select_critical(kurtosis_sweep(d), d, min_tail=101)


def test_tie_break_prefers_larger_inferior_set():
    from ddcrit.critical import SweepPoint

    d = dset(np.linspace(0.01, 1.0, 100))
    sweep = [SweepPoint(0.3, 29, 0.05), SweepPoint(0.5, 49, -0.05), SweepPoint(0.4, 39, 0.2)]
    assert select_critical(sweep, d, min_tail=10).n_inf == 49


def test_cutoff_belongs_to_superior_segment():
    x = half_normal(4)
    d = dset(x)
    split = select_critical(kurtosis_sweep(d), d)
    assert np.sum(x >= split.x_min) == split.n_sup
    assert np.sum(x < split.x_min) == split.n_inf
    assert split.k_sup == pytest.approx(excess_kurtosis(x[x >= split.x_min]))
    assert split.k_tot == pytest.approx(excess_kurtosis(x))
    assert split.x_max == x.max()


@pytest.mark.parametrize("n_sup, n_inf, n_tot, pct", [(170, 526, 696, 24.43), (266, 881, 1147, 23.19)])
def test_split_report_bookkeeping(n_sup, n_inf, n_tot, pct):
    split = CriticalSplit(0.03, n_sup + n_inf, n_sup, n_inf, 31.4, 12.0, -0.002, 0.47)
    r = split_report(split)
    assert list(r) == ["N_tot", "N_sup", "N_inf", "%Sup", "K_tot", "K_sup", "K_inf", "x_Max", "x_min"]
    assert r["N_tot"] == n_tot
    assert round(100 * r["%Sup"], 2) == pct


def test_minimal_split_echoes_inputs():
    split = CriticalSplit(0.05, 25, 1, 24, 3.0, None, 0.01, 0.05)
    assert tuple(split_report(split).values()) == (25, 1, 24, 1 / 25, 3.0, None, 0.01, 0.05, 0.05)
    with pytest.raises(ValueError):
        CriticalSplit(0.05, 25, 2, 24, 3.0, None, 0.01, 0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 40), st.integers(2, 40))
def test_raising_min_tail_never_grows_tail(seed, t1, t2):
    x = np.abs(np.random.default_rng(seed).standard_t(3, 300))
    d = dset(x)
    sweep = kurtosis_sweep(d)
    lo, hi = sorted((t1, t2))
    a = select_critical(sweep, d, lo)
    b = select_critical(sweep, d, hi)
    assert a.n_sup + a.n_inf == a.n_total == b.n_total == b.n_sup + b.n_inf
    assert b.n_sup >= hi
    # the low-threshold optimum stays optimal whenever it is still eligible
    if a.n_sup >= hi:
        assert b == a


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(1e-3, 1e3))
def test_scaling_selects_same_indices(seed, k):
    x = np.abs(np.random.default_rng(seed).standard_t(3, 200))
    _, a = find_critical(dset(x))
    _, b = find_critical(dset(k * x))
    assert (a.n_sup, a.n_inf) == (b.n_sup, b.n_inf)
    assert b.k_inf == pytest.approx(a.k_inf, abs=1e-9)
    assert b.k_sup == pytest.approx(a.k_sup, rel=1e-9)
    assert b.x_min == pytest.approx(k * a.x_min, rel=1e-12)


def test_table1_pct_sup_and_partition():
    rows, _ = load_table1()
    assert len(rows) == 30
    for r in rows:
        assert r.n_tot == r.n_sup + r.n_inf, r.symbol
        assert abs(100 * r.n_sup / r.n_tot - r.pct_sup) <= 0.01, r.symbol
