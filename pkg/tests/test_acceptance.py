"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (see ``conftest.pytest_terminal_summary``)
before asserting, so a full run lists all nine verdicts. Run on their own with
``pytest tests/test_acceptance.py -v -s``. The K-sweep repeats whole passes and
keeps the fastest time per K; ``FPSIEVE_SWEEP_PASSES`` sets how many (default 2).
"""
import os
import time

import numpy as np
import pytest

from conftest import EXAMPLE_TIDS, random_db, reference_rate, example_db
from fpsieve.bench import k_sweep
from fpsieve.core import MiningConfig, ScratchBuffers, VerticalDatabase, delta_encode, root_context
from fpsieve.filters import expand_grouped
from fpsieve.generator import generate_bernoulli, plant_dependency
from fpsieve.miner import build_conditional, mark_reference, clear_reference, mine, mine_patterns
from fpsieve.oracle import enumerate_frequent

RESULTS: list[str] = []


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_golden_example():
    db = example_db()
    cfg = MiningConfig(min_support=5, max_depth=2)

    def golden():
        root = root_context(db, cfg, rate=reference_rate())
        child = build_conditional(root, 5, cfg, ScratchBuffers.allocate(20))
        return child, mine_patterns(db, cfg, root_rate=reference_rate())

    # the first pass loads (or, on a fresh install, compiles) the kernels; time that separately
    t0 = time.perf_counter()
    golden()
    cold = time.perf_counter() - t0
    t0 = time.perf_counter()
    child, pats = golden()
    elapsed = time.perf_counter() - t0
    elements = {db.names[n]: int(f) for n, f in zip(child.names, child.freqs)}
    stream = [(p.support, tuple(db.names[i] for i in p.items)) for p in pats if db.names[p.items[0]] == "x12"]
    ok = (
        elements == {"x3": 5, "x10": 7, "x14": 7, "x1": 6, "x7": 5}
        and (child.rate + 1).tolist() == [1, 5, 4, 2, 3]
        and stream[1:] == [
            (5, ("x12", "x3")), (5, ("x12", "x7")), (6, ("x12", "x1")),
            (7, ("x12", "x10")), (7, ("x12", "x14")),
        ]
        and elapsed < 1.0
    )
    verdict(1, ok, f"elements={elements} rate={(child.rate + 1).tolist()} {elapsed:.3f}s (kernel load {cold:.2f}s)")


def test_criterion_2_scratch_template():
    db = example_db()
    root = root_context(db, MiningConfig(min_support=5), rate=reference_rate())
    scratch = ScratchBuffers.allocate(20)
    mark_reference(root, 5, scratch)
    kod = scratch.kod_tr.tolist()
    marked = [t for t in range(1, 21) if kod[t - 1]]
    new = [int(scratch.new_tr[t - 1]) for t in marked]
    clear_reference(root, 5, scratch)
    ok = (
        kod == [1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1]
        and marked == EXAMPLE_TIDS["x12"]
        and new == list(range(1, 10))
        and not scratch.kod_tr.any()
    )
    verdict(2, ok, f"KodTr={''.join(map(str, kod))} NewTr={new}")


def test_criterion_3_renumbered_and_delta_lists():
    expected_abs = {
        "x3": [2, 4, 5, 8, 9], "x10": [1, 3, 4, 5, 6, 8, 9], "x14": [2, 3, 4, 5, 7, 8, 9],
        "x1": [2, 4, 5, 6, 8, 9], "x7": [2, 3, 5, 8, 9],
    }
    expected_delta = {
        "x3": [2, 2, 1, 3, 1], "x10": [1, 2, 1, 1, 1, 2, 1], "x14": [2, 1, 1, 1, 2, 1, 1],
        "x1": [2, 2, 1, 1, 2, 1], "x7": [2, 1, 2, 3, 1],
    }
    db = example_db()
    ok = True
    for enc in ({}, {"delta_encoding": True}):
        cfg = MiningConfig(min_support=5, **enc)
        root = root_context(db, cfg, rate=reference_rate())
        child = build_conditional(root, 5, cfg, ScratchBuffers.allocate(20))
        absolute = {db.names[n]: child.tid_list(j).tolist() for j, n in enumerate(child.names)}
        stored = {db.names[n]: child.raw_list(j).tolist() for j, n in enumerate(child.names)}
        ok &= absolute == expected_abs
        ok &= stored == (expected_delta if enc else expected_abs)
    ok &= all(delta_encode(v).tolist() == expected_delta[k] for k, v in expected_abs.items())
    verdict(3, ok, "renumbered and delta rows for x3 x10 x14 x1 x7")


def test_criterion_4_oracle_equivalence():
    rng = np.random.default_rng(2024)
    mismatches = 0
    t0 = time.perf_counter()
    for _ in range(200):
        m = int(rng.integers(1, 15))
        n = int(rng.integers(1, 41))
        p = float(rng.choice([0.3, 0.5, 0.7]))
        xi = int(rng.choice([2, 3, 5]))
        k = int(rng.integers(1, 6))
        db = random_db(rng, m, n, p)
        got = {q.itemset: q.support for q in mine_patterns(db, MiningConfig(min_support=xi, max_depth=k))}
        mismatches += got != enumerate_frequent(db, xi, k)
    elapsed = time.perf_counter() - t0
    verdict(4, mismatches == 0 and elapsed < 60, f"200 instances, {mismatches} mismatches, {elapsed:.1f}s")


def _block_db(rng):
    m = int(rng.integers(5, 11))
    n = int(rng.integers(10, 41))
    mat = rng.random((n, m)) < float(rng.choice([0.3, 0.5, 0.7]))
    size = int(rng.integers(2, 4))
    block = rng.choice(m, size=size, replace=False)
    for b in block[1:]:
        mat[:, b] = mat[:, block[0]]
    lists = tuple((np.flatnonzero(mat[:, k]) + 1).astype(np.int32) for k in range(m))
    return VerticalDatabase(tuple(f"i{k}" for k in range(m)), lists, n)


def test_criterion_5_grouping_lossless():
    rng = np.random.default_rng(5)
    bad = 0
    grouped_any = 0
    for _ in range(50):
        db = _block_db(rng)
        xi = int(rng.choice([1, 2, 3]))
        grouped = mine_patterns(db, MiningConfig(min_support=xi, grouping_enabled=True))
        full = mine_patterns(db, MiningConfig(min_support=xi))
        grouped_any += any(p.group for p in grouped)
        bad += expand_grouped(grouped) != {p.itemset: p.support for p in full}
    verdict(5, bad == 0, f"50 databases, {bad} mismatches, {grouped_any} with groups")


def test_criterion_6_filter_behaviour():
    cfg = MiningConfig(max_depth=2, filter_enabled=True, sigma_multiplier=3.0)
    total_pairs = kept_pairs = 0
    worst = 1.0
    planted_kept = 0
    for seed in range(20):
        db = generate_bernoulli(50, 10000, 0.5, seed=seed)
        kept = sum(1 for p in mine_patterns(db, cfg) if len(p) == 2)
        total_pairs += 50 * 49 // 2
        kept_pairs += kept
        worst = min(worst, 1 - kept / 1225)
        planted = plant_dependency(db, 0, 1, 0.9, seed=1000 + seed)
        pairs = {p.itemset for p in mine_patterns(planted, cfg) if len(p) == 2}
        planted_kept += frozenset({0, 1}) in pairs
    dropped = 1 - kept_pairs / total_pairs
    ok = dropped >= 0.99 and worst >= 0.99 and planted_kept == 20
    verdict(6, ok, f"dropped {dropped:.4f} overall (worst seed {worst:.4f}), planted kept {planted_kept}/20")


@pytest.mark.slow
def test_criterion_7_k_sweep_shape():
    db = generate_bernoulli(50, 10000, 0.5, seed=0)
    passes = int(os.environ.get("FPSIEVE_SWEEP_PASSES", "2"))
    rows = k_sweep(db, MiningConfig(min_support=20), range(2, 9), passes=passes)
    times = {r.k: r.seconds for r in rows}
    ratios = {k: times[k] / times[k - 1] for k in range(3, 9)}
    monotone = all(times[k] >= times[k - 1] for k in range(3, 9))
    saturating = all(ratios[k] <= ratios[k - 1] for k in range(6, 9))
    detail = "times " + " ".join(f"K{k}={t:.2f}s" for k, t in times.items())
    detail += " ratios " + " ".join(f"{k}:{r:.2f}" for k, r in ratios.items())
    verdict(7, monotone and saturating, detail)


@pytest.fixture(scope="module")
def scale_run():
    db = generate_bernoulli(50, 100_000, 0.5, seed=0)
    t0 = time.perf_counter()
    stats = mine(db, MiningConfig(min_support=4000))
    return time.perf_counter() - t0, stats


@pytest.mark.slow
def test_criterion_8_scale(scale_run):
    elapsed, stats = scale_run
    verdict(8, elapsed < 300, f"{elapsed:.1f}s, {stats.total_patterns} patterns {stats.patterns_by_length}")


@pytest.mark.slow
def test_criterion_9_memory(scale_run):
    _, stats = scale_run
    ratio = stats.peak_storage_bytes / stats.root_storage_bytes
    # the tighter 1x figure is an estimate: logged, not asserted
    verdict(
        9,
        stats.peak_storage_bytes > 0 and ratio <= 4,
        f"peak {stats.peak_storage_bytes} B vs root {stats.root_storage_bytes} B = {ratio:.3f}x"
        f" (1x estimate {'met' if ratio <= 1 else 'not met'})",
    )
