"""The iterative sieve: enclosed level cycles over materialized conditional databases.

The cycles are an explicit stack of level cursors held in flat arrays (see
``_kernels``); no step recurses. Patterns are emitted depth-first, visiting
reference elements in ascending-frequency (rate) order at every level.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence, TextIO

import numpy as np

from . import _kernels as K
from .core import (
    VARINT,
    LevelContext,
    MiningConfig,
    Pattern,
    ScratchBuffers,
    VerticalDatabase,
    root_context,
)

OUT_CAPACITY = 1 << 16


class PatternSink(Protocol):
    def accept(self, pattern: Pattern) -> None: ...


class PatternCollector:
    def __init__(self):
        self.patterns: list[Pattern] = []

    def accept(self, pattern: Pattern) -> None:
        self.patterns.append(pattern)


class PatternCounter:
    """Count-only sink; mining skips pattern materialization entirely."""

    wants_patterns = False

    def accept(self, pattern: Pattern) -> None:  # pragma: no cover - never called
        pass


class PatternWriter:
    def __init__(self, stream: TextIO, names: Sequence[str]):
        from .io import format_pattern

        self._format = format_pattern
        self.stream = stream
        self.names = names

    def accept(self, pattern: Pattern) -> None:
        self.stream.write(self._format(pattern, self.names))
        self.stream.write("\n")


class _CallableSink:
    def __init__(self, fn: Callable[[Pattern], None]):
        self.accept = fn


@dataclass
class MiningStats:
    patterns_by_length: dict[int, int] = field(default_factory=dict)
    contexts_by_level: dict[int, int] = field(default_factory=dict)
    scanned_by_level: dict[int, int] = field(default_factory=dict)
    filtered_by_level: dict[int, int] = field(default_factory=dict)
    level_seconds: dict[int, float] = field(default_factory=dict)
    peak_storage_bytes: int = 0
    root_storage_bytes: int = 0
    elapsed_seconds: float = 0.0

    @property
    def total_patterns(self) -> int:
        return sum(self.patterns_by_length.values())

    @property
    def total_filtered(self) -> int:
        return sum(self.filtered_by_level.values())

    def to_key_values(self) -> list[tuple[str, str]]:
        rows = [
            ("patterns_total", str(self.total_patterns)),
            ("filtered_total", str(self.total_filtered)),
            ("peak_storage_bytes", str(self.peak_storage_bytes)),
            ("root_storage_bytes", str(self.root_storage_bytes)),
            ("elapsed_seconds", f"{self.elapsed_seconds:.6f}"),
        ]
        for k in sorted(self.patterns_by_length):
            rows.append((f"patterns_len_{k}", str(self.patterns_by_length[k])))
        for m in sorted(self.contexts_by_level):
            rows.append((f"level_{m}_contexts", str(self.contexts_by_level[m])))
            rows.append((f"level_{m}_scanned", str(self.scanned_by_level.get(m, 0))))
            rows.append((f"level_{m}_filtered", str(self.filtered_by_level.get(m, 0))))
            if m in self.level_seconds:
                rows.append((f"level_{m}_seconds", f"{self.level_seconds[m]:.6f}"))
        return rows


def _item_vars(db: VerticalDatabase, stride: int | None) -> np.ndarray:
    var = np.full(db.item_count, -1, dtype=np.int64)
    if stride is None:
        return var
    for i, name in enumerate(db.names):
        try:
            var[i] = int(name) // stride
        except ValueError:
            pass
    return var


def _kernel_config(db: VerticalDatabase, cfg: MiningConfig, kmax: int, collect: bool, timing: bool):
    rootfreq = db.frequencies() if db.item_count else np.zeros(0, dtype=np.int64)
    return K.KernelConfig(
        xi=np.int64(cfg.min_support),
        kmax=np.int64(kmax),
        mode=np.int64(cfg.encoding),
        filt=bool(cfg.filter_enabled),
        sigma=float(cfg.sigma_multiplier),
        grouping=bool(cfg.grouping_enabled),
        n_root=np.int64(max(db.n_transactions, 1)),
        collect=bool(collect),
        timing=bool(timing),
        rootfreq=rootfreq.astype(np.int64),
        var=_item_vars(db, cfg.exclusive_stride),
    )


def _new_state(root: LevelContext, levels: int, scratch: ScratchBuffers) -> K.KernelState:
    m = max(root.element_count, 1)
    st = K.KernelState(
        names=np.zeros((levels, m), np.int32),
        freqs=np.zeros((levels, m), np.int32),
        addrs=np.zeros((levels, m), np.int64),
        ends=np.zeros((levels, m), np.int64),
        rate=np.zeros((levels, m), np.int32),
        count=np.zeros(levels, np.int64),
        txn=np.zeros(levels, np.int64),
        lo=np.zeros(levels, np.int64),
        top=np.zeros(levels, np.int64),
        pos=np.zeros(levels, np.int64),
        built=np.zeros(levels, np.int8),
        refs=np.zeros(levels, np.int32),
        grp=np.zeros((levels, m), np.int32),
        glen=np.zeros(levels, np.int64),
        kod=scratch.kod_tr,
        new=scratch.new_tr,
    )
    n = root.element_count
    st.names[0, :n] = root.names
    st.freqs[0, :n] = root.freqs
    st.addrs[0, :n] = root.addrs
    st.ends[0, :n] = root.ends
    st.rate[0, :n] = root.rate
    st.count[0] = n
    st.txn[0] = root.txn_count
    return st


def _decode_records(buf: list[int]):
    o = 0
    n = len(buf)
    while o < n:
        support, length = buf[o], buf[o + 1]
        o += 2
        items = []
        groups = []
        for _ in range(length):
            items.append(buf[o])
            glen = buf[o + 1]
            o += 2
            groups.append(tuple(buf[o:o + glen]))
            o += glen
        yield Pattern(tuple(items), support, tuple(groups))


class _Task:
    """One sequential mining task over a subset of level-1 reference positions."""

    def __init__(self, root, kcfg, root_positions, n_transactions, out_capacity):
        self.root = root
        self.kcfg = kcfg
        self.positions = np.asarray(root_positions, dtype=np.int64)
        levels = max(int(kcfg.kmax), 1)
        self.state = _new_state(root, levels, ScratchBuffers.allocate(n_transactions))
        dtype = np.uint8 if root.encoding == VARINT else np.int32
        self.arena = np.zeros(max(2 * len(root.storage), 64), dtype=dtype)
        max_record = 2 + 2 * levels + root.element_count
        self.out = np.zeros(max(out_capacity, max_record), dtype=np.int32)
        self.regs = np.zeros(K.N_REGS, dtype=np.int64)
        self.per_length = np.zeros(root.element_count + 2, dtype=np.int64)
        self.stats = np.zeros((K.N_STATS, levels + 1), dtype=np.int64)

    def run(self, emit: Callable[[list[int]], None] | None):
        self.regs[K.R_DEPTH] = 0 if len(self.positions) else -1
        while True:
            status = K.run(
                self.state, self.kcfg, self.root.storage, self.arena, self.positions,
                self.out, self.regs, self.per_length, self.stats,
            )
            if emit is not None and self.regs[K.R_OUTLEN]:
                emit(self.out[: self.regs[K.R_OUTLEN]].tolist())
            self.regs[K.R_OUTLEN] = 0
            if status == K.DONE:
                return
            if status == K.NEED_GROW:
                need = int(self.regs[K.R_NEED])
                grown = np.zeros(max(need, 2 * len(self.arena)), dtype=self.arena.dtype)
                grown[: len(self.arena)] = self.arena
                self.arena = grown


def mine(
    db: VerticalDatabase,
    cfg: MiningConfig,
    sink: PatternSink | Callable[[Pattern], None] | None = None,
    *,
    root_rate: Sequence[int] | None = None,
    threads: int = 1,
    level_timing: bool = True,
    out_capacity: int = OUT_CAPACITY,
) -> MiningStats:
    """Mine every frequent pattern of length up to ``cfg.max_depth``.

    ``sink`` receives :class:`Pattern` objects; ``None`` or a sink with
    ``wants_patterns = False`` only counts. ``root_rate`` fixes the level-1
    visit order. With ``threads > 1`` the level-1 references are dealt
    round-robin to independent tasks and the emission order is unspecified.
    """
    started = time.perf_counter()
    if sink is not None and not hasattr(sink, "accept"):
        sink = _CallableSink(sink)
    collect = sink is not None and getattr(sink, "wants_patterns", True)
    root = root_context(db, cfg, rate=root_rate)
    n_el = root.element_count
    kmax = min(cfg.max_depth or n_el, n_el)
    kcfg = _kernel_config(db, cfg, kmax, collect, level_timing)

    threads = max(1, min(threads, n_el or 1))
    parts = [list(range(t, n_el, threads)) for t in range(threads)]
    tasks = [_Task(root, kcfg, p, db.n_transactions, out_capacity) for p in parts]

    lock = threading.Lock()

    def emit(buf):
        with lock:
            for pattern in _decode_records(buf):
                sink.accept(pattern)

    c0 = K.cycles_now()
    t0 = time.perf_counter()
    if threads == 1:
        tasks[0].run(emit if collect else None)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fut in [pool.submit(t.run, emit if collect else None) for t in tasks]:
                fut.result()
    wall = time.perf_counter() - t0
    cycles = K.cycles_now() - c0

    stats = MiningStats(root_storage_bytes=root.storage_bytes)
    per_length = sum(t.per_length for t in tasks)
    table = sum(t.stats for t in tasks)
    stats.patterns_by_length = {k: int(v) for k, v in enumerate(per_length) if v}
    itemsize = root.storage.itemsize
    stats.peak_storage_bytes = int(sum(t.regs[K.R_PEAK] for t in tasks)) * itemsize
    sec_per_cycle = wall / cycles if cycles > 0 else 0.0
    # table column d holds contexts consumed by level d + 1
    for d in range(1, table.shape[1]):
        if table[K.S_BUILT, d] == 0:
            continue
        level = d + 1
        stats.contexts_by_level[level] = int(table[K.S_BUILT, d])
        stats.scanned_by_level[level] = int(table[K.S_SCANNED, d])
        stats.filtered_by_level[level] = int(table[K.S_FILTERED, d])
        if level_timing:
            stats.level_seconds[level] = float(table[K.S_CYCLES, d]) * sec_per_cycle
    stats.elapsed_seconds = time.perf_counter() - started
    return stats


def mine_patterns(db: VerticalDatabase, cfg: MiningConfig, **kwargs) -> list[Pattern]:
    collector = PatternCollector()
    mine(db, cfg, collector, **kwargs)
    return collector.patterns


def build_conditional(
    parent: LevelContext,
    ref_rate_pos: int,
    cfg: MiningConfig,
    scratch: ScratchBuffers,
    *,
    root_frequencies: np.ndarray | None = None,
    n_root: int | None = None,
) -> LevelContext:
    """Build the conditional database of the element at ``parent.rate[ref_rate_pos]``.

    Candidates are the elements later in the parent's rate order. The
    filter, when enabled, needs the root frequencies indexed by ItemId and
    the root transaction count.
    """
    if parent.encoding != cfg.encoding:
        raise ValueError("parent encoding differs from cfg")
    if not 0 <= ref_rate_pos < parent.element_count:
        raise IndexError("ref_rate_pos outside the parent's rate")
    if len(scratch.kod_tr) < parent.txn_count:
        raise ValueError("scratch buffers shorter than the parent's transaction count")
    size = int(parent.names.max()) + 1 if parent.element_count else 0
    if cfg.filter_enabled and (root_frequencies is None or n_root is None):
        raise ValueError("filtering needs root_frequencies and n_root")
    rootfreq = np.zeros(size, np.int64) if root_frequencies is None else np.asarray(root_frequencies, np.int64)
    kcfg = K.KernelConfig(
        xi=np.int64(cfg.min_support),
        kmax=np.int64(2),
        mode=np.int64(cfg.encoding),
        filt=bool(cfg.filter_enabled),
        sigma=float(cfg.sigma_multiplier),
        grouping=bool(cfg.grouping_enabled),
        n_root=np.int64(n_root or parent.txn_count),
        collect=False,
        timing=False,
        rootfreq=rootfreq,
        var=np.full(max(size, len(rootfreq)), -1, np.int64),
    )
    st = _new_state(parent, 2, scratch)
    arena = np.zeros(max(len(parent.storage), 1), dtype=parent.storage.dtype)
    stats = np.zeros((K.N_STATS, 2), dtype=np.int64)
    K.build_child(st, kcfg, parent.storage, arena, 0, ref_rate_pos, stats)
    n = int(st.count[1])
    j = int(parent.rate[ref_rate_pos])
    return LevelContext(
        storage=arena[: st.top[1]].copy(),
        names=st.names[1, :n].copy(),
        freqs=st.freqs[1, :n].copy(),
        addrs=st.addrs[1, :n].copy(),
        ends=st.ends[1, :n].copy(),
        rate=st.rate[1, :n].copy(),
        txn_count=int(st.txn[1]),
        prefix=parent.prefix + (int(parent.names[j]),),
        encoding=parent.encoding,
        group=tuple(int(x) for x in st.grp[0, : st.glen[0]]),
    )


def mark_reference(parent: LevelContext, ref_rate_pos: int, scratch: ScratchBuffers) -> tuple[int, int]:
    """Write the KodTr/NewTr template for one reference; returns its (min, max) tid."""
    j = int(parent.rate[ref_rate_pos])
    lo, hi = K.mark_template(
        parent.storage, parent.addrs[j], parent.ends[j], parent.encoding,
        scratch.kod_tr, scratch.new_tr,
    )
    return int(lo), int(hi)


def clear_reference(parent: LevelContext, ref_rate_pos: int, scratch: ScratchBuffers) -> None:
    j = int(parent.rate[ref_rate_pos])
    K.clear_template(parent.storage, parent.addrs[j], parent.ends[j], parent.encoding, scratch.kod_tr)


@dataclass
class LevelCursor:
    context: LevelContext
    position: int = 0
    prefix_groups: tuple[tuple[int, ...], ...] = ()

    @property
    def exhausted(self) -> bool:
        return self.position >= self.context.element_count

    def reference(self) -> tuple[int, int]:
        """(ItemId, frequency) of the current reference element."""
        j = int(self.context.rate[self.position])
        return int(self.context.names[j]), int(self.context.freqs[j])


def emit_patterns_at_level(cursor: LevelCursor, sink, group: Sequence[int] = ()) -> None:
    item, freq = cursor.reference()
    if not hasattr(sink, "accept"):
        sink = _CallableSink(sink)
    groups = cursor.prefix_groups or tuple(() for _ in cursor.context.prefix)
    sink.accept(Pattern(cursor.context.prefix + (item,), freq, groups + (tuple(group),)))
