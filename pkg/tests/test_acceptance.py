"""Quantitative acceptance checks.

Each test prints one [PASS]/[FAIL] line (visible even under -q) and then
asserts, so the suite doubles as a human-readable scorecard.  Everything
runs against the deterministic surrogate backend; no trainer process is
involved.
"""

import dataclasses
import time
from pathlib import Path

import numpy as np
import pytest

from genas.arch_compiler import decode, feature_shape
from genas.data_tools import ConfusionMatrix, balanced_batches, compute_metrics
from genas.evaluation import SurrogateEvaluator, TrainConfig
from genas.fitness import FitnessCache, genas_wf
from genas.genetic_ops import GaConfig, crossover, mutate
from genas.orchestrator import RunConfig, iter_log, run_search
from genas.search_space import SearchSpace, random_genome, validate_genome

from oracles import simulate_cells, sliding_window_best


def report(capsys, ok, name, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_01_metric_reproduction(capsys):
    start = time.perf_counter()
    # Counts are (tp, fp, fn, tn); reported accuracies are percentages
    # truncated to two decimals, hence the 0.01 point allowance.
    cases = [
        ("acrosome", (197, 16, 51, 36), 233 / 300, 77.66, 0.7767),
        ("head", (255, 7, 15, 23), 278 / 300, 92.66, 0.9267),
        ("vacuole", (203, 16, 52, 29), 232 / 300, 77.33, 0.7733),
    ]
    ok = True
    details = []
    for label, (tp, fp, fn, tn), exact, reported, rounded in cases:
        m = compute_metrics(ConfusionMatrix(true_positive=tp, false_positive=fp,
                                            true_negative=tn, false_negative=fn))
        ok = ok and m.accuracy == exact
        ok = ok and abs(m.accuracy * 100 - reported) <= 0.01
        ok = ok and round(m.accuracy, 4) == rounded
        details.append(f"{label} {m.accuracy:.4f}")
    acrosome = compute_metrics(ConfusionMatrix(197, 16, 36, 51))
    ok = ok and abs(acrosome.f_score - 246.25 / 275) < 1e-12
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 1.0
    report(capsys, ok, "metric reproduction",
           f"{', '.join(details)}, f0.5 {acrosome.f_score:.4f}, {elapsed:.3f}s")


def test_02_pruning_oracle(capsys):
    start = time.perf_counter()
    agree = 0
    trials = 1000
    for seed in range(trials):
        space = SearchSpace(allow_skip_conv=bool(seed % 2))
        genome = random_genome(space, np.random.default_rng(seed))
        p = decode(genome, space)
        kept, _, final_shape = simulate_cells(genome.cells(), 64, 64, 1)
        if p.cells_kept == kept and feature_shape(p) == final_shape:
            agree += 1
    elapsed = time.perf_counter() - start
    ok = agree == trials and elapsed < 5.0
    report(capsys, ok, "pruning oracle",
           f"{agree}/{trials} genomes agree on kept cells and final shape, "
           f"{elapsed:.2f}s")


def test_03_smoothing_oracle(capsys):
    rng = np.random.default_rng(12345)
    worst = 0.0
    trials = 1000
    for _ in range(trials):
        n = int(rng.integers(1, 60))
        m = int(rng.integers(1, 12))
        series = rng.random(n)
        weights = rng.random(m) + 0.01
        got = genas_wf(series, weights)
        want = sliding_window_best(list(series), list(weights))
        worst = max(worst, abs(got - want))
    ok = worst <= 1e-12
    report(capsys, ok, "smoothed fitness oracle",
           f"{trials} series/window pairs, max deviation {worst:.2e}")


def test_04_operator_closure(capsys):
    space = SearchSpace()
    cfg = GaConfig(crossover_prob=1.0, mutation_prob=1.0)
    rng = np.random.default_rng(777)
    trials = 10_000
    violations = 0
    for _ in range(trials):
        p1 = random_genome(space, rng)
        p2 = random_genome(space, rng)
        out = crossover(p1, p2, space, cfg, rng)
        if validate_genome(out.child1, space) or validate_genome(out.child2, space):
            violations += 1
        if len(out.child1) + len(out.child2) != len(p1) + len(p2):
            violations += 1
        if out.crossed and not out.fell_back and out.point1 % 4 != out.point2 % 4:
            violations += 1
    for _ in range(trials):
        g = random_genome(space, rng)
        if validate_genome(mutate(g, space, cfg, rng).genome, space):
            violations += 1
    ok = violations == 0
    report(capsys, ok, "operator closure",
           f"{trials} crossovers + {trials} mutations, "
           f"{violations} constraint violations")


def test_05_sampler_balance(capsys):
    labels = np.array([0] * 900 + [1] * 100)
    batches = balanced_batches(labels, 32, np.random.default_rng(2025))
    collected = []
    seen = set()
    negative_slots = 0
    for _ in range(1000):
        batch = next(batches)
        collected.append(batch.copy())
        seen.update(int(i) for i in batch)
        negative_slots += int(np.sum(labels[batch] == 0))
    share = negative_slots / 32_000
    replay = balanced_batches(labels, 32, np.random.default_rng(2025))
    deterministic = all(np.array_equal(next(replay), b) for b in collected)
    ok = abs(share - 0.5) <= 0.02 and seen == set(range(1000)) and deterministic
    report(capsys, ok, "sampler balance",
           f"negative slot share {share:.4f}, {len(seen)}/1000 indices seen, "
           f"deterministic={deterministic}")


def test_06_search_dynamics(tmp_path, capsys):
    start = time.perf_counter()
    positive = 0
    slopes = []
    for seed in range(10):
        cfg = RunConfig(seed=seed,
                        log_path=str(tmp_path / f"dyn_{seed}.jsonl"),
                        ga=GaConfig(population_size=30, generations=20),
                        train=TrainConfig())
        assert cfg.ga.tournament_size == 10
        assert (cfg.ga.crossover_prob, cfg.ga.mutation_prob) == (0.7, 0.3)
        result = run_search(cfg)
        means = [s["mean"] for s in result.summaries]
        slope = float(np.polyfit(np.arange(len(means)), means, 1)[0])
        slopes.append(slope)
        if slope > 0:
            positive += 1
    elapsed = time.perf_counter() - start
    ok = positive >= 8 and elapsed < 120.0
    report(capsys, ok, "search dynamics",
           f"{positive}/10 seeds with positive mean-fitness slope "
           f"(median {np.median(slopes):.2e}), {elapsed:.1f}s")


def test_07_cache_reuse(tmp_path, capsys):
    shared_cache = str(tmp_path / "shared.cache.tsv")
    base = RunConfig(seed=31,
                     log_path=str(tmp_path / "cache_a.jsonl"),
                     cache_path=shared_cache,
                     checkpoint_path=str(tmp_path / "cache_a.ckpt.json"),
                     ga=GaConfig(population_size=10, generations=5),
                     train=TrainConfig(mini_batches=100))
    first = run_search(base, evaluator=SurrogateEvaluator())

    rerun_cfg = dataclasses.replace(
        base, log_path=str(tmp_path / "cache_b.jsonl"),
        checkpoint_path=str(tmp_path / "cache_b.ckpt.json"))
    rerun_evaluator = SurrogateEvaluator()
    second = run_search(rerun_cfg, evaluator=rerun_evaluator)

    logged = {}
    for rec in iter_log(base.log_path):
        if rec["type"] == "evaluation" and not rec["hit"]:
            logged[rec["key"]] = rec["fitness"]
    reloaded = FitnessCache(shared_cache)
    bit_identical = reloaded.entries() == logged

    ok = (rerun_evaluator.calls == 0 and second.best == first.best
          and bit_identical)
    report(capsys, ok, "cache reuse",
           f"rerun evaluator calls {rerun_evaluator.calls}, "
           f"{len(reloaded)} entries reload bit-identically={bit_identical}")


def test_08_reproducibility(tmp_path, capsys):
    def cfg(tag):
        return RunConfig(seed=47,
                         log_path=str(tmp_path / f"{tag}.jsonl"),
                         cache_path=str(tmp_path / f"{tag}.cache.tsv"),
                         checkpoint_path=str(tmp_path / f"{tag}.ckpt.json"),
                         ga=GaConfig(population_size=12, generations=6),
                         train=TrainConfig(mini_batches=200))

    a, b, c = cfg("rep_a"), cfg("rep_b"), cfg("rep_c")
    run_search(a)
    run_search(b)
    twin_identical = Path(a.log_path).read_bytes() == Path(b.log_path).read_bytes()

    paused = run_search(c, stop_after=3)
    resumed = run_search(c, resume_from=c.checkpoint_path)
    resume_identical = (Path(c.log_path).read_bytes()
                        == Path(a.log_path).read_bytes())
    ok = twin_identical and not paused.complete and resumed.complete \
        and resume_identical
    report(capsys, ok, "reproducibility",
           f"same-seed logs identical={twin_identical}, "
           f"resume after 3/6 generations identical={resume_identical}")
