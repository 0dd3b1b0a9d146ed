"""Acceptance suite: each criterion prints one PASS/FAIL line with its tolerance."""
import datetime as dt
import math
import time

import numpy as np

from ddcrit import rng
from ddcrit.cli import run_cli
from ddcrit.controls import GbmSpec, gen_gbm, gen_mixture_series, weekdays
from ddcrit.drawdowns import WindowSpec, extract_drawdowns
from ddcrit.powerlaw import fit_power_law, rank_size_regression
from ddcrit.report import (AnalysisConfig, analyze_index, default_groups, group_xmin, load_table1,
                           load_table1_text, parse_table)
from ddcrit.series import PriceSeries, excess_kurtosis

from conftest import record_acceptance
from oracles import brute_segments, brute_window_max


def report(n, title, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    record_acceptance(f"[{status}] {n}. {title}: {detail}; runtime {elapsed:.2f}s (limit {limit:g}s)")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.2f}s over {limit:g}s"


def test_1_sigma_identity():
    t0 = time.perf_counter()
    rows, _ = load_table1()
    off = []
    for r in rows:
        recomputed = (r.alpha - 1) / math.sqrt(r.n_sup)
        if abs(recomputed - r.sigma) > 0.0005:
            off.append(f"{r.symbol} {recomputed:.4f} vs printed {r.sigma:.3f}")
    detail = f"{len(rows) - len(off)}/{len(rows)} rows within +-0.0005"
    if off:
        detail += " (" + "; ".join(off) + ")"
    report(1, "column l = (alpha-1)/sqrt(N_sup)", not off and len(rows) == 30, detail,
           time.perf_counter() - t0, 1)


def _decimals(cell):
    s = cell.rstrip("%")
    return len(s.split(".")[1]) if "." in s else 0


def test_2_bookkeeping():
    t0 = time.perf_counter()
    _, body, printed = parse_table(load_table1_text())
    problems = []
    for r in body:
        n_tot, n_sup, n_inf = int(r[1]), int(r[2]), int(r[3])
        if n_tot != n_sup + n_inf:
            problems.append(f"{r[0]} N_tot")
        if abs(100 * n_sup / n_tot - float(r[4].rstrip("%"))) > 0.01:
            problems.append(f"{r[0]} %Sup")
    for srow in printed:
        agg = {"AVERAGE": np.mean, "MAX": np.max, "MIN": np.min}[srow[0]]
        for j in range(1, len(srow)):
            col = np.array([float(r[j].rstrip("%")) for r in body])
            unit = 10.0 ** -_decimals(srow[j])
            if abs(agg(col) - float(srow[j].rstrip("%"))) > unit + 1e-9:
                problems.append(f"{srow[0]} col {j}: {agg(col):.5f} vs {srow[j]}")
    detail = (f"{len(body)} rows partitioned and %Sup within 0.01pp; summary rows within one unit "
              f"of the last printed decimal" if not problems else "; ".join(problems))
    report(2, "table bookkeeping", not problems and len(body) == 30, detail,
           time.perf_counter() - t0, 1)


GROUP_TARGETS = {"Regional": -3.86, "USA": -3.062, "EM Europe": -6.27, "Dev Europe": -4.12, "LatAm": -5.58}


def test_3_group_means():
    t0 = time.perf_counter()
    rows, _ = load_table1()
    means = {g.group: g.mean_x_min for g in group_xmin(rows, default_groups())}
    bad = [f"{g} {means[g]:.4f} vs {v}" for g, v in GROUP_TARGETS.items() if abs(means[g] - v) > 0.01]
    detail = ", ".join(f"{g} {means[g]:.3f}" for g in GROUP_TARGETS) + " (+-0.01)"
    detail += f"; Asia recomputes to {means['Asia']:.3f}, text states -4.466 (known discrepancy)"
    if bad:
        detail = "out of tolerance: " + "; ".join(bad)
    report(3, "group mean critical levels", not bad, detail, time.perf_counter() - t0, 1)


def test_4_estimator_recovery():
    t0 = time.perf_counter()
    alpha, x_min, n = 2.25, 0.02, 5000
    covered, slopes = 0, []
    for seed in range(100):
        u = rng.stream(seed, "acceptance-pareto").random(n)
        x = x_min * (1.0 - u) ** (-1.0 / (alpha - 1.0))
        fit = fit_power_law(x, x_min)
        covered += abs(fit.alpha - alpha) <= 3 * fit.sigma
        ranked = np.sort(x)[::-1]
        slopes.append(rank_size_regression(list(zip(range(1, n + 1), ranked))).slope)
    worst = float(np.max(np.abs(np.array(slopes) + 0.8)))
    ok = covered >= 99 and worst <= 0.05
    detail = (f"alpha within 3 sigma in {covered}/100 (need >= 99); "
              f"max |slope + 0.8| = {worst:.4f} (need <= 0.05)")
    report(4, "power-law estimator recovery", ok, detail, time.perf_counter() - t0, 30)


def test_5_segmentation_oracle():
    t0 = time.perf_counter()
    gen = rng.stream(5, "acceptance-segmentation")
    mismatches = 0
    for k in range(1000):
        n = int(gen.integers(2, 201))
        if k % 2:
            window = WindowSpec("trading_days", int(gen.integers(1, 80)))
            dates = weekdays(n)
        else:
            window = WindowSpec("calendar_months", int(gen.integers(1, 7)))
            steps = np.cumsum(gen.integers(1, 15, n))
            dates = [dt.date(2003, 8, 31) + dt.timedelta(days=int(s)) for s in steps]
        closes = 100 * np.exp(np.cumsum(gen.normal(0, 0.02, n)))
        if k % 5 == 0:
            closes = np.round(closes, 0) + 1  # plateaus and exact ties
        s = PriceSeries("r", dates, closes)
        _, _, events = extract_drawdowns(s, window)
        ceiling = brute_window_max(list(s.closes), s.dates, window.mode, window.span)
        ref = brute_segments(np.asarray(s.closes) - np.asarray(ceiling), ceiling)
        same = len(events) == len(ref) and all(
            (e.start_index, e.trough_index, e.end_index, e.complete)
            == (r["start_index"], r["trough_index"], r["end_index"], r["complete"])
            and abs(e.depth_points - r["depth_points"]) <= 1e-12
            and abs(e.depth_rel - r["depth_rel"]) <= 1e-12
            for e, r in zip(events, ref))
        mismatches += not same
    report(5, "segmentation vs brute force", mismatches == 0,
           f"{1000 - mismatches}/1000 series identical (boundaries exact, depths to 1e-12)",
           time.perf_counter() - t0, 30)


def test_6_kurtosis_primitives():
    t0 = time.perf_counter()
    alt = excess_kurtosis(np.tile([1.0, -1.0], 500))
    normal = rng.stream(6, "acceptance-kurtosis").normal(size=10 ** 6)
    k_norm = excess_kurtosis(normal)
    x = rng.stream(7, "acceptance-kurtosis").standard_t(5, 1000)
    base = excess_kurtosis(x)
    drift = max(abs(excess_kurtosis(a * x + b) - base) for a, b in [(3.7, -2.0), (-0.01, 50.0), (1e4, 1e3)])
    ok = alt == -2.0 and abs(k_norm) <= 0.05 and drift <= 1e-9
    detail = f"alternating +-1 -> {alt!r} (exact -2); normal 1e6 -> {k_norm:.4f} (+-0.05); affine drift {drift:.1e} (<= 1e-9)"
    report(6, "kurtosis primitives", ok, detail, time.perf_counter() - t0, 5)


def test_7_controls():
    t0 = time.perf_counter()
    random_walk = self_organized = 0
    for seed in range(50):
        cfg = AnalysisConfig(bootstrap_trials=200, master_seed=seed)
        g = analyze_index(gen_gbm(GbmSpec(8000, 0.0, 0.01, seed=seed)), cfg)
        random_walk += g.verdict.label == "RandomWalkOnly"
        m = analyze_index(gen_mixture_series(seed)[0], cfg)
        self_organized += m.verdict.label == "SelfOrganized"
    ok = random_walk >= 48 and self_organized >= 48
    detail = (f"GBM RandomWalkOnly {random_walk}/50, mixture SelfOrganized {self_organized}/50 "
              f"(each need >= 95%)")
    report(7, "control specificity and sensitivity", ok, detail, time.perf_counter() - t0, 120)


def test_8_determinism(tmp_path):
    t0 = time.perf_counter()
    src = tmp_path / "mix.csv"
    assert run_cli(["synth", "mixture", "--seed", "8", "-o", str(src)]) == 0
    gbm = tmp_path / "gbm.csv"
    assert run_cli(["synth", "gbm", "--seed", "8", "--n-days", "4000", "-o", str(gbm)]) == 0
    runs = []
    for k in (1, 2):
        out = tmp_path / f"run{k}"
        assert run_cli(["analyze", str(src), str(gbm), "--bootstrap", "200", "--seed", "11",
                        "--out-dir", str(out), "--plots"]) == 0
        assert run_cli(["table", str(src), str(gbm), "--bootstrap", "200", "--seed", "11",
                        "--format", "json", "-o", str(out / "table.json")]) == 0
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    identical = runs[0] == runs[1] and len(runs[0]) >= 12
    report(8, "CLI determinism", identical,
           f"{len(runs[0])} table and plot files byte-identical across two runs",
           time.perf_counter() - t0, 10)
