"""Acceptance gate: one test per release criterion.

Each test records a one-line verdict; the conftest terminal-summary hook
prints every line at the end of the run. Experiment-scale criteria share the
module-scoped benchmark fixture so the suite stays within its time limits.
"""

import itertools
import time

import numpy as np
import pytest
import scipy.stats

from tieredal.annotate import (OracleConfig, labeling_efficiency,
                               oracle_annotate, ratio_stats)
from tieredal.cli import main as cli_main
from tieredal.kernels import cosine_kernel, log_det, logdetmi_eval, regularize
from tieredal.model import TrainConfig, init_params, loss_and_grad
from tieredal.orchestrate import (ExperimentConfig, cost_accuracy_curve,
                                  resolve_dataset, run_round, run_experiment,
                                  split_run)
from tieredal.select import badge_select
from tieredal.smi import greedy_maximize

from conftest import VERDICTS


def record(num, name, passed, detail):
    VERDICTS.append(f"[{'PASS' if passed else 'FAIL'}] criterion {num:>2}: "
                    f"{name} ({detail})")


def smi_value(cand, query, subset, lam=1e-3):
    subset = list(subset)
    if not subset:
        return 0.0
    A = cand[subset]
    return logdetmi_eval(regularize(cosine_kernel(A, A), lam),
                         regularize(cosine_kernel(query, query), lam),
                         cosine_kernel(A, query))


BENCH = dict(blob_classes=20, blob_per_class=50, blob_dim=5, blob_spread=1.2,
             seed_size=60, b1=10, b2=10, b3=10, rounds=8,
             c_a=3.0, c_v=1.0, train=TrainConfig(t_max=40), rng_seed=11)


@pytest.fixture(scope="module")
def bench_runs():
    """Shared benchmark runs: clarifier x5 seeds, both baselines x3 seeds."""
    out = {}
    for method, runs in (("clarifier", 5), ("al_suggest", 3), ("al_plain", 3)):
        t0 = time.perf_counter()
        cfg = ExperimentConfig(method=method, runs=runs, **BENCH)
        out[method] = run_experiment(cfg)
        out[method + "_elapsed"] = time.perf_counter() - t0
    return out


def mean_efficiency(runs_fast, runs_slow):
    """Per-seed labeling efficiency at mid-curve accuracy, averaged."""
    vals = []
    for rf, rs in zip(runs_fast, runs_slow):
        cf, cs = cost_accuracy_curve(rf), cost_accuracy_curve(rs)
        a0 = cs[0][1]
        amax = min(max(a for _, a in cf), max(a for _, a in cs))
        target = 0.5 * (a0 + amax)
        vals.append(labeling_efficiency(cf, cs, target))
    return float(np.mean(vals))


def test_criterion_1_greedy_guarantee():
    rng = np.random.default_rng(0)
    bound = 1 - 1 / np.e
    t0 = time.perf_counter()
    violations = 0
    for _ in range(50):
        n = int(rng.integers(4, 9))
        k = int(rng.integers(1, 4))
        cand = rng.standard_normal((n, 4))
        query = rng.standard_normal((3, 4))
        greedy_val = sum(greedy_maximize(cand, query, k).gains)
        best = 0.0
        for size in range(1, k + 1):
            for subset in itertools.combinations(range(n), size):
                best = max(best, smi_value(cand, query, subset))
        violations += greedy_val < bound * best - 1e-9
    elapsed = time.perf_counter() - t0
    passed = violations == 0 and elapsed < 30
    record(1, "greedy value >= (1-1/e) x optimum on 50 instances", passed,
           f"violations={violations}, {elapsed:.1f}s")
    assert passed


def test_criterion_2_incremental_equals_naive():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        cand = rng.standard_normal((30, 6))
        query = rng.standard_normal((5, 6))
        trace = greedy_maximize(cand, query, 8)
        running = []
        for pos, gain in zip(trace.selected, trace.gains):
            naive = (smi_value(cand, query, running + [pos])
                     - smi_value(cand, query, running))
            worst = max(worst, abs(gain - naive))
            running.append(pos)
    passed = worst <= 1e-8
    record(2, "incremental gains match naive re-evaluation", passed,
           f"max |diff|={worst:.2e} <= 1e-8")
    assert passed


def test_criterion_3_log_det_oracle():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        B = rng.standard_normal((10, 10))
        A = B @ B.T + 0.1 * np.eye(10)
        worst = max(worst, abs(log_det(A) - float(np.sum(np.log(
            np.linalg.eigvalsh(A))))))
    passed = worst <= 1e-8
    record(3, "Cholesky log-det matches eigenvalue sum", passed,
           f"max |diff|={worst:.2e} <= 1e-8")
    assert passed


def test_criterion_4_gradient_check():
    rng = np.random.default_rng(3)
    worst = 0.0
    step = 1e-5
    for trial in range(20):
        arch = "mlp" if trial % 2 else "linear"
        cfg = TrainConfig(arch=arch, hidden_dim=4 if arch == "mlp" else 0)
        m = init_params(3, 3, cfg, rng)
        X = rng.standard_normal((6, 3))
        y = rng.integers(3, size=6)
        _, grads = loss_and_grad(m, X, y, 5e-4)
        for key, G in grads.items():
            arr = getattr(m, key)
            for fi in rng.integers(arr.size, size=min(4, arr.size)):
                idx = np.unravel_index(fi, arr.shape)
                orig = arr[idx]
                arr[idx] = orig + step
                lp, _ = loss_and_grad(m, X, y, 5e-4)
                arr[idx] = orig - step
                lm, _ = loss_and_grad(m, X, y, 5e-4)
                arr[idx] = orig
                fd = (lp - lm) / (2 * step)
                worst = max(worst, abs(G[idx] - fd) / max(1.0, abs(fd)))
    passed = worst <= 1e-4
    record(4, "analytic gradients match finite differences", passed,
           f"max rel err={worst:.2e} <= 1e-4")
    assert passed


def test_criterion_5_cost_model_exact():
    import dataclasses
    from tieredal.model import train
    cfg = ExperimentConfig(runs=1, **{**BENCH, "rounds": 4})
    ds = resolve_dataset(cfg)
    pool, _ = split_run(ds, cfg, 0)
    m = train(pool, ds, dataclasses.replace(cfg.train, rng_seed=1))
    exact = True
    for rnd in range(1, 5):
        pool, m, rec, records = run_round(pool, ds, m, cfg, 0, rnd, 0.0)
        n = len(records)
        n_correct = sum(r.suggestion_correct for r in records)
        exact &= rec.cost_round == cfg.c_v * n_correct + cfg.c_a * (n - n_correct)
    record(5, "round cost = c_v*n_correct + c_a*(n-n_correct) exactly", exact,
           "4 rounds, zero tolerance")
    assert exact


def test_criterion_6_tier_ordering(bench_runs):
    ok = total = 0
    for recs in bench_runs["clarifier"]:
        for r in recs[1:]:
            acc = {t: r.tiers[t]["suggestion_correct"] / r.tiers[t]["selected"]
                   for t in ("hard", "intermediate", "easy")}
            total += 1
            ok += acc["easy"] >= acc["intermediate"] >= acc["hard"]
    elapsed = bench_runs["clarifier_elapsed"]
    passed = ok / total >= 0.9 and elapsed < 300
    record(6, "easy >= intermediate >= hard suggestion accuracy", passed,
           f"{ok}/{total} rounds ordered, {elapsed:.0f}s")
    assert passed


def test_criterion_7_suggest_efficiency(bench_runs):
    eff = mean_efficiency(bench_runs["al_suggest"], bench_runs["al_plain"])
    passed = eff >= 1.1
    record(7, "al_suggest vs al_plain labeling efficiency", passed,
           f"mean={eff:.2f} >= 1.1")
    assert passed


def test_criterion_8_clarifier_efficiency(bench_runs):
    clar = bench_runs["clarifier"][:3]
    vs_plain = mean_efficiency(clar, bench_runs["al_plain"])
    vs_suggest = mean_efficiency(clar, bench_runs["al_suggest"])
    elapsed = sum(bench_runs[k + "_elapsed"]
                  for k in ("clarifier", "al_suggest", "al_plain"))
    passed = vs_plain >= 1.2 and vs_suggest >= 1.0 and elapsed < 600
    record(8, "clarifier labeling efficiency", passed,
           f"vs plain {vs_plain:.2f} >= 1.2, vs suggest {vs_suggest:.2f} >= 1.0,"
           f" {elapsed:.0f}s")
    assert passed


def test_criterion_9_ablation_direction():
    def margins(c_a, rounds, **ablation):
        base = {**BENCH, "c_a": c_a, "rounds": rounds, "rng_seed": 23}
        full = run_experiment(ExperimentConfig(runs=3, **base))
        abl = run_experiment(ExperimentConfig(runs=3, **{**base, **ablation}))
        out = []
        for rf, ra in zip(full, abl):
            cf, ca = cost_accuracy_curve(rf), cost_accuracy_curve(ra)
            c = min(cf[-1][0], ca[-1][0])
            out.append(float(np.interp(c, *zip(*cf)) - np.interp(c, *zip(*ca))))
        return float(np.mean(out))

    # b1=0 needs a longer horizon: without hard instances the pool plateaus
    # only once the cheap representative picks stop adding information
    m_no_smi = margins(4.0, 8, b2=0)
    m_no_al = margins(2.0, 16, b1=0)
    passed = m_no_smi >= 0 and m_no_al >= 0
    record(9, "removing a tier degrades cost-normalized accuracy", passed,
           f"b2=0@c_a=4: +{m_no_smi:.3f}, b1=0@c_a=2: +{m_no_al:.3f}")
    assert passed


def test_criterion_10_ratio_statistics():
    rng = np.random.default_rng(4)
    cfg = OracleConfig(mode="bernoulli_suggestion", q=0.5, c_a=3.5, c_v=1.0,
                       timing_noise=0.25)
    hits = 0
    reps = 20
    for _ in range(reps):
        mean_ratios = []
        for _ in range(100):
            recs = [oracle_annotate(i, 0, 1, cfg, rng, 10) for i in range(100)]
            mean_ratios.append(ratio_stats(recs).mean_ratio)
        hits += 3.0 <= float(np.mean(mean_ratios)) <= 4.0
    passed = hits / reps >= 0.95
    record(10, "mean-of-mean elapsed ratios in [3,4]", passed,
           f"{hits}/{reps} repetitions")
    assert passed


def test_criterion_11_kmeanspp_law():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
    probs = np.full((4, 2), 0.5)
    d2 = np.sum((pts[:, None] - pts[None]) ** 2, axis=2)
    expected = {}
    for i in range(4):
        row = d2[i] / d2[i].sum()
        for j in range(4):
            if j != i:
                expected[(i, j)] = 0.25 * row[j]
    counts = {pair: 0 for pair in expected}
    for seed in range(10_000):
        batch = badge_select(pts, np.arange(4), probs, 2, rng_seed=seed)
        counts[(batch.items[0].index, batch.items[1].index)] += 1
    pairs = sorted(expected)
    _, p = scipy.stats.chisquare(
        [counts[k] for k in pairs],
        [expected[k] * 10_000 for k in pairs])
    passed = p > 0.01
    record(11, "k-means++ frequencies match D^2 law", passed,
           f"chi-square p={p:.3f} > 0.01")
    assert passed


def test_criterion_12_cli_determinism(tmp_path):
    args = ["--blob-classes", "5", "--blob-per-class", "30", "--blob-dim", "4",
            "--seed-size", "15", "--b1", "3", "--b2", "3", "--b3", "2",
            "--rounds", "2", "--epochs", "15", "--rng-seed", "9"]
    assert cli_main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    raw1 = (tmp_path / "a" / "results_run0.json").read_bytes()
    raw2 = (tmp_path / "b" / "results_run0.json").read_bytes()
    passed = raw1 == raw2
    record(12, "repeated CLI runs are byte-identical", passed,
           f"{len(raw1)} bytes compared")
    assert passed
