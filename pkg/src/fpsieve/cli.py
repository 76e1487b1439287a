"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input parse error.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from . import bench
from .core import MiningConfig, VerticalDatabase
from .generator import generate_bernoulli, plant_dependency
from .io import ParseError, load_schema, parse_basket, parse_record, serialize_basket, write_patterns
from .miner import PatternCollector, PatternWriter, mine
from .oracle import OracleBudgetError, enumerate_frequent

EXIT_OK, EXIT_USAGE, EXIT_PARSE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return value == "on"


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _k_range(value: str) -> range:
    try:
        a, b = (int(x) for x in value.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError("expected A..B") from None
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("need 1 <= A <= B")
    return range(a, b + 1)


def _add_mining_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-support", type=_positive_int, default=1)
    p.add_argument("--filter", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--sigma", type=float, default=3.0)
    p.add_argument("--grouping", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--delta", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--varint", type=_on_off, default=False, metavar="on|off",
                   help="byte-level variable-width storage of deltas (implies --delta on)")
    p.add_argument("--exclusive-skip", type=_on_off, default=False, metavar="on|off",
                   help="skip same-variable pairs of record-coded items")


def _add_input_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--input", required=required)
    p.add_argument("--format", choices=("basket", "record"), default="basket")
    p.add_argument("--schema")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpsieve", description="Frequent pattern mining by iterative sieve.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{mine,generate,bench}",
                                parser_class=_Parser)

    m = sub.add_parser("mine", help="mine frequent patterns from a file")
    _add_input_flags(m, required=True)
    _add_mining_flags(m)
    m.add_argument("--max-len", type=_positive_int, default=None)
    m.add_argument("--output", default="-")
    m.add_argument("--stats")
    m.add_argument("--sort-by-support", action="store_true")
    m.add_argument("--threads", type=_positive_int, default=1)

    g = sub.add_parser("generate", help="write a synthetic basket file")
    g.add_argument("--items", type=int, required=True)
    g.add_argument("--transactions", type=int, required=True)
    g.add_argument("--prob", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", required=True)
    g.add_argument("--plant", help="SOURCE,TARGET,COPY_PROB with 1-based item numbers")

    b = sub.add_parser("bench", help="time mining across a range of depth limits")
    b.add_argument("--k-sweep", type=_k_range, required=True, metavar="A..B")
    _add_input_flags(b, required=False)
    b.add_argument("--items", type=int, default=50)
    b.add_argument("--transactions", type=int, default=10000)
    b.add_argument("--prob", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    _add_mining_flags(b)
    b.add_argument("--passes", type=_positive_int, default=1)
    b.add_argument("--output", default="-")

    o = sub.add_parser("oracle")
    _add_input_flags(o, required=True)
    o.add_argument("--min-support", type=_positive_int, default=1)
    o.add_argument("--max-len", type=_positive_int, required=True)
    return parser


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _load(args) -> VerticalDatabase:
    try:
        with open(args.input) as fh:
            if args.format == "record":
                if not args.schema:
                    raise UsageError("--format record requires --schema")
                return parse_record(fh, load_schema(args.schema))
            return parse_basket(fh)
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _config(args, max_len) -> MiningConfig:
    stride = None
    if args.exclusive_skip:
        if args.format != "record":
            raise UsageError("--exclusive-skip needs --format record")
        stride = load_schema(args.schema).stride
    try:
        return MiningConfig(
            min_support=args.min_support,
            max_depth=max_len,
            filter_enabled=args.filter,
            sigma_multiplier=args.sigma,
            grouping_enabled=args.grouping,
            delta_encoding=args.delta or args.varint,
            varint=args.varint,
            exclusive_stride=stride,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mine(args) -> int:
    db = _load(args)
    cfg = _config(args, args.max_len)
    with _open_out(args.output) as out:
        if args.sort_by_support:
            collector = PatternCollector()
            stats = mine(db, cfg, collector, threads=args.threads)
            ranked = sorted(collector.patterns, key=lambda p: -p.support)
            write_patterns(ranked, out, db.names)
        else:
            stats = mine(db, cfg, PatternWriter(out, db.names), threads=args.threads)
    if args.stats:
        with open(args.stats, "w") as fh:
            for key, value in stats.to_key_values():
                fh.write(f"{key}={value}\n")
    return EXIT_OK


def _parse_plant(spec: str, items: int) -> tuple[int, int, float]:
    try:
        s, t, c = spec.split(",")
        source, target, copy_prob = int(s) - 1, int(t) - 1, float(c)
    except ValueError:
        raise UsageError("--plant expects SOURCE,TARGET,COPY_PROB") from None
    if not (0 <= source < items and 0 <= target < items) or source == target:
        raise UsageError("--plant items must be distinct numbers in [1, --items]")
    if not 0 <= copy_prob <= 1:
        raise UsageError("--plant copy probability must be in [0, 1]")
    return source, target, copy_prob


def cmd_generate(args) -> int:
    if args.items < 0 or args.transactions < 0:
        raise UsageError("--items and --transactions must be non-negative")
    if not 0 <= args.prob <= 1:
        raise UsageError("--prob must be in [0, 1]")
    plant = _parse_plant(args.plant, args.items) if args.plant else None
    db = generate_bernoulli(args.items, args.transactions, args.prob, args.seed)
    if plant:
        source, target, copy_prob = plant
        db = plant_dependency(db, source, target, copy_prob, seed=args.seed + 1)
    with open(args.output, "w") as fh:
        serialize_basket(db, fh)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.input:
        db = _load(args)
    else:
        if not 0 <= args.prob <= 1 or args.items < 0 or args.transactions < 0:
            raise UsageError("invalid generator parameters")
        db = generate_bernoulli(args.items, args.transactions, args.prob, args.seed)
    cfg = _config(args, None)
    rows = bench.k_sweep(db, cfg, args.k_sweep, passes=args.passes)
    with _open_out(args.output) as out:
        bench.write_csv(rows, out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    db = _load(args)
    try:
        found = enumerate_frequent(db, args.min_support, args.max_len)
    except OracleBudgetError as exc:
        raise UsageError(str(exc)) from None
    lines = sorted((-s, sorted(db.names[i] for i in items)) for items, s in found.items())
    for neg, names in lines:
        print(f"{-neg}\t{' '.join(names)}")
    return EXIT_OK


COMMANDS = {"mine": cmd_mine, "generate": cmd_generate, "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fpsieve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"fpsieve: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
