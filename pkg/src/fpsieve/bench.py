"""Time-versus-depth sweeps."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

from .core import MiningConfig, VerticalDatabase
from .miner import mine

CSV_HEADER = "k,seconds,patterns,peak_bytes"


@dataclass(frozen=True)
class SweepRow:
    k: int
    seconds: float
    patterns: int
    peak_bytes: int


def k_sweep(
    db: VerticalDatabase, cfg: MiningConfig, ks: Iterable[int], passes: int = 1
) -> list[SweepRow]:
    """Mine once per depth limit in ``ks`` (count only) and record wall time.

    With ``passes > 1`` the whole sweep is repeated and each K keeps its
    fastest time; repeating whole passes rather than single points spreads
    transient machine load across all K. A warm-up run absorbs JIT loading.
    """
    ks = list(ks)
    mine(db, replace(cfg, max_depth=1), level_timing=False)
    best: dict[int, SweepRow] = {}
    for _ in range(max(passes, 1)):
        for k in ks:
            t0 = time.perf_counter()
            stats = mine(db, replace(cfg, max_depth=k), level_timing=False)
            seconds = time.perf_counter() - t0
            row = SweepRow(k, seconds, stats.total_patterns, stats.peak_storage_bytes)
            if k not in best or seconds < best[k].seconds:
                best[k] = row
    return [best[k] for k in ks]


def write_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
    stream.write(CSV_HEADER + "\n")
    for r in rows:
        stream.write(f"{r.k},{r.seconds:.6f},{r.patterns},{r.peak_bytes}\n")
