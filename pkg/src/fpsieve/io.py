"""Line-oriented text formats: basket and record inputs, pattern output."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .core import Pattern, VerticalDatabase


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _check_token(tok: str, lineno: int) -> None:
    if not tok.isprintable() or "(" in tok or ")" in tok:
        raise ParseError(lineno, f"malformed item token {tok!r}")


class _Interner:
    """Dense ItemIds in first-occurrence order."""

    def __init__(self):
        self.ids: dict[str, int] = {}
        self.lists: list[list[int]] = []

    def add(self, name: str, tid: int) -> None:
        item = self.ids.get(name)
        if item is None:
            item = self.ids[name] = len(self.lists)
            self.lists.append([])
        lst = self.lists[item]
        if not lst or lst[-1] != tid:
            lst.append(tid)

    def database(self, n_transactions: int) -> VerticalDatabase:
        return VerticalDatabase(
            names=tuple(self.ids),
            tid_lists=tuple(np.array(lst, dtype=np.int32) for lst in self.lists),
            n_transactions=n_transactions,
        )


def parse_basket(stream: Iterable[str]) -> VerticalDatabase:
    """One transaction per non-blank line, items separated by whitespace.

    Repeated items within a line count once. Blank lines are skipped, so
    empty transactions do not survive a round trip through this format.
    """
    interner = _Interner()
    tid = 0
    for lineno, line in enumerate(stream, start=1):
        tokens = line.split()
        if not tokens:
            continue
        tid += 1
        for tok in tokens:
            _check_token(tok, lineno)
            interner.add(tok, tid)
    return interner.database(tid)


def serialize_basket(db: VerticalDatabase, stream: TextIO) -> None:
    """Write ``db`` in basket format, items of each line in ItemId order."""
    rows: list[list[str]] = [[] for _ in range(db.n_transactions)]
    for item, tids in enumerate(db.tid_lists):
        name = db.names[item]
        for t in tids.tolist():
            rows[t - 1].append(name)
    for row in rows:
        stream.write(" ".join(row))
        stream.write("\n")


@dataclass(frozen=True)
class RecordSchema:
    """Value arity of each variable; item code is ``stride * variable + value`` (both 1-based)."""

    arities: tuple[int, ...]
    stride: int = 100

    def __post_init__(self):
        if self.stride < 2:
            raise ValueError("stride must be >= 2")
        for i, n in enumerate(self.arities, start=1):
            if not 1 <= n < self.stride:
                raise ValueError(f"variable {i}: arity {n} must be in [1, {self.stride})")

    @property
    def variable_count(self) -> int:
        return len(self.arities)

    def encode(self, variable: int, value: int) -> int:
        return self.stride * variable + value

    def decode(self, code: int) -> tuple[int, int]:
        return divmod(code, self.stride)


def load_schema(path: str) -> RecordSchema:
    """Read a JSON schema: ``{"arities": [n1, n2, ...], "stride": 100}``."""
    with open(path) as fh:
        raw = json.load(fh)
    return RecordSchema(arities=tuple(int(n) for n in raw["arities"]), stride=int(raw.get("stride", 100)))


def parse_record(stream: Iterable[str], schema: RecordSchema) -> VerticalDatabase:
    interner = _Interner()
    tid = 0
    for lineno, line in enumerate(stream, start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != schema.variable_count:
            raise ParseError(lineno, f"expected {schema.variable_count} fields, got {len(fields)}")
        tid += 1
        for var, (field, arity) in enumerate(zip(fields, schema.arities), start=1):
            try:
                value = int(field)
            except ValueError:
                raise ParseError(lineno, f"field {var}: {field!r} is not an integer") from None
            if not 1 <= value <= arity:
                raise ParseError(lineno, f"field {var}: value {value} outside [1, {arity}]")
            interner.add(str(schema.encode(var, value)), tid)
    return interner.database(tid)


def format_pattern(pattern: Pattern, names: Sequence[str]) -> str:
    parts = []
    for item, group in zip(pattern.items, pattern.groups):
        parts.append(names[item])
        if group:
            parts.append("(" + " ".join(names[g] for g in group) + ")")
    return f"{pattern.support}\t{' '.join(parts)}"


def write_patterns(patterns: Iterable[Pattern], writer: TextIO, names: Sequence[str]) -> None:
    for pattern in patterns:
        writer.write(format_pattern(pattern, names))
        writer.write("\n")
