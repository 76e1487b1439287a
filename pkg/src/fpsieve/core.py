"""Data model: the vertical root database, flat-array level contexts and
the encoding primitives they are stored with.

Transaction ids are 1-based everywhere they are visible as values. Array
offsets, element indices and rate positions are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PLAIN, DELTA, VARINT = 0, 1, 2
ENCODING_NAMES = {PLAIN: "plain", DELTA: "delta", VARINT: "varint"}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class VerticalDatabase:
    """Per-item ascending tid-lists over ``n_transactions`` transactions."""

    names: tuple[str, ...]
    tid_lists: tuple[np.ndarray, ...]
    n_transactions: int

    def __post_init__(self):
        if len(self.names) != len(self.tid_lists):
            raise ValueError("names and tid_lists differ in length")
        for name, tids in zip(self.names, self.tid_lists):
            if len(tids) == 0:
                continue
            if tids[0] < 1 or tids[-1] > self.n_transactions:
                raise ValueError(f"tid out of range for item {name!r}")
            if len(tids) > 1 and np.any(np.diff(tids) <= 0):
                raise ValueError(f"tid-list of {name!r} is not strictly increasing")

    @property
    def item_count(self) -> int:
        return len(self.names)

    def frequencies(self) -> np.ndarray:
        return np.array([len(t) for t in self.tid_lists], dtype=np.int64)

    def storage_bytes(self) -> int:
        return int(sum(t.nbytes for t in self.tid_lists))

    def to_transactions(self) -> list[set[int]]:
        """Horizontal view: one set of ItemIds per transaction."""
        rows: list[set[int]] = [set() for _ in range(self.n_transactions)]
        for item, tids in enumerate(self.tid_lists):
            for t in tids:
                rows[t - 1].add(item)
        return rows

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def build_vertical(
    transactions: Sequence[Iterable[int]],
    item_count: int | None = None,
    names: Sequence[str] | None = None,
) -> VerticalDatabase:
    """Scan transactions once, in order, and collect per-item tid-lists.

    Items must already be dense ids. ``item_count`` defaults to one past the
    largest id seen; ``names`` defaults to the ids rendered as strings.
    """
    rows = [set(t) for t in transactions]
    if item_count is None:
        item_count = max((max(r) for r in rows if r), default=-1) + 1
    lists: list[list[int]] = [[] for _ in range(item_count)]
    for tid, row in enumerate(rows, start=1):
        for item in row:
            if not 0 <= item < item_count:
                raise ValueError(f"item id {item} outside [0, {item_count})")
            lists[item].append(tid)
    if names is None:
        names = [str(i) for i in range(item_count)]
    return VerticalDatabase(
        names=tuple(names),
        tid_lists=tuple(np.array(lst, dtype=np.int32) for lst in lists),
        n_transactions=len(rows),
    )


def compute_rate(freqs: Sequence[int]) -> np.ndarray:
    """Indices that visit ``freqs`` in ascending order; ties keep index order."""
    return np.argsort(np.asarray(freqs, dtype=np.int64), kind="stable").astype(np.int32)


def delta_encode(tids: Sequence[int]) -> np.ndarray:
    arr = np.asarray(tids, dtype=np.int64)
    if arr.size == 0:
        return arr.astype(np.int32)
    if arr[0] < 1:
        raise EncodingError("transaction ids start at 1")
    out = np.empty_like(arr)
    out[0] = arr[0]
    out[1:] = np.diff(arr)
    if np.any(out[1:] <= 0):
        raise EncodingError("tid-list must be strictly increasing")
    return out.astype(np.int32)


def delta_decode(deltas: Sequence[int]) -> np.ndarray:
    return np.cumsum(np.asarray(deltas, dtype=np.int64)).astype(np.int32)


def varint_encode(values: Iterable[int]) -> bytes:
    """Unsigned LEB128: 7 payload bits per byte, high bit set on all but the last."""
    out = bytearray()
    for v in values:
        v = int(v)
        if v < 0:
            raise EncodingError("varint values must be non-negative")
        while v >= 0x80:
            out.append((v & 0x7F) | 0x80)
            v >>= 7
        out.append(v)
    return bytes(out)


def varint_decode(data: bytes | np.ndarray) -> np.ndarray:
    values = []
    acc = shift = 0
    for byte in bytes(data):
        acc |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
        else:
            values.append(acc)
            acc = shift = 0
    if shift:
        raise EncodingError("truncated varint stream")
    return np.array(values, dtype=np.int64)


def encode_list(tids: np.ndarray, mode: int) -> np.ndarray:
    """Storage form of one ascending tid-list under ``mode``."""
    if mode == PLAIN:
        return np.asarray(tids, dtype=np.int32)
    deltas = delta_encode(tids)
    if mode == DELTA:
        return deltas
    return np.frombuffer(varint_encode(deltas), dtype=np.uint8)


def decode_list(chunk: np.ndarray, mode: int) -> np.ndarray:
    if mode == PLAIN:
        return np.asarray(chunk, dtype=np.int32)
    if mode == DELTA:
        return delta_decode(chunk)
    return delta_decode(varint_decode(chunk))


@dataclass(frozen=True)
class MiningConfig:
    min_support: int = 1
    max_depth: int | None = None
    filter_enabled: bool = False
    sigma_multiplier: float = 3.0
    grouping_enabled: bool = False
    delta_encoding: bool = False
    varint: bool = False
    # record-type coding stride; items whose codes share ``code // stride`` never co-occur
    exclusive_stride: int | None = None

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not self.sigma_multiplier > 0:
            raise ValueError("sigma_multiplier must be > 0")
        if self.varint and not self.delta_encoding:
            raise ValueError("varint storage requires delta_encoding")
        if self.exclusive_stride is not None and self.exclusive_stride < 2:
            raise ValueError("exclusive_stride must be >= 2")

    @property
    def encoding(self) -> int:
        if self.varint:
            return VARINT
        return DELTA if self.delta_encoding else PLAIN


@dataclass
class LevelContext:
    """One conditional database as a flat storage array plus key arrays.

    ``addrs[j]``/``ends[j]`` delimit element ``j``'s list inside ``storage``;
    for the integer encodings ``ends[j] - addrs[j] == freqs[j]``. ``rate`` is
    the 0-based visit order. ``group`` is set only when the same-frequency
    optimization removed elements from this context.
    """

    storage: np.ndarray
    names: np.ndarray
    freqs: np.ndarray
    addrs: np.ndarray
    ends: np.ndarray
    rate: np.ndarray
    txn_count: int
    prefix: tuple[int, ...] = ()
    encoding: int = PLAIN
    group: tuple[int, ...] = ()

    @property
    def element_count(self) -> int:
        return len(self.names)

    @property
    def storage_bytes(self) -> int:
        return int(self.storage.nbytes)

    def tid_list(self, j: int) -> np.ndarray:
        return decode_list(self.storage[self.addrs[j]:self.ends[j]], self.encoding)

    def raw_list(self, j: int) -> np.ndarray:
        return self.storage[self.addrs[j]:self.ends[j]]

    def as_dict(self) -> dict[int, list[int]]:
        """ItemId -> decoded tid-list, in storage order."""
        return {int(self.names[j]): self.tid_list(j).tolist() for j in range(self.element_count)}


def root_context(
    db: VerticalDatabase,
    cfg: MiningConfig,
    rate: Sequence[int] | None = None,
) -> LevelContext:
    """Level-1 context: every item with root frequency >= min_support, in item order.

    ``rate`` overrides the computed visit order; it must be a 0-based
    permutation of the kept elements that is non-decreasing in frequency.
    """
    mode = cfg.encoding
    kept = [i for i, t in enumerate(db.tid_lists) if len(t) >= cfg.min_support]
    chunks = [encode_list(db.tid_lists[i], mode) for i in kept]
    sizes = np.array([len(c) for c in chunks], dtype=np.int64)
    addrs = np.zeros(len(kept), dtype=np.int64)
    if len(kept):
        addrs[1:] = np.cumsum(sizes)[:-1]
    dtype = np.uint8 if mode == VARINT else np.int32
    storage = np.concatenate(chunks).astype(dtype) if chunks else np.zeros(0, dtype=dtype)
    freqs = np.array([len(db.tid_lists[i]) for i in kept], dtype=np.int32)
    if rate is None:
        order = compute_rate(freqs)
    else:
        order = np.asarray(rate, dtype=np.int32)
        if sorted(order.tolist()) != list(range(len(kept))):
            raise ValueError("rate override is not a permutation of the kept elements")
        if np.any(np.diff(freqs[order]) < 0):
            raise ValueError("rate override does not visit frequencies in ascending order")
    return LevelContext(
        storage=storage,
        names=np.array(kept, dtype=np.int32),
        freqs=freqs,
        addrs=addrs,
        ends=addrs + sizes,
        rate=order,
        txn_count=db.n_transactions,
        encoding=mode,
    )


@dataclass
class ScratchBuffers:
    """Marker and renumbering arrays shared by every conditional build.

    ``kod_tr[t - 1]`` is 1 while transaction ``t`` belongs to the current
    reference element; ``new_tr[t - 1]`` is its id in the child database.
    """

    kod_tr: np.ndarray
    new_tr: np.ndarray

    @classmethod
    def allocate(cls, n_transactions: int) -> "ScratchBuffers":
        return cls(
            kod_tr=np.zeros(n_transactions, dtype=np.int8),
            new_tr=np.zeros(n_transactions, dtype=np.int32),
        )


@dataclass(frozen=True)
class Pattern:
    """A frequent pattern in visit order.

    ``groups[k]`` holds the same-frequency elements anchored after
    ``items[k]``; it is empty unless grouping is enabled.
    """

    items: tuple[int, ...]
    support: int
    groups: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.groups:
            object.__setattr__(self, "groups", tuple(() for _ in self.items))

    @property
    def group(self) -> tuple[int, ...]:
        return tuple(x for g in self.groups for x in g)

    @property
    def itemset(self) -> frozenset[int]:
        return frozenset(self.items) | frozenset(self.group)

    def __len__(self) -> int:
        return len(self.items) + len(self.group)
