"""Command-line harness: single runs, support sweeps, miner self-check.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import random
import sys
from contextlib import nullcontext
from typing import Sequence

from .core import Config, ConfigError, OrderPolicy
from .fpstream import SequencingError
from .oracle import (
    MAX_ORACLE_ITEMS,
    MAX_ORACLE_TRANSACTIONS,
    compare,
    mine_with_fpgrowth,
    minimize,
    random_batch,
)
from .stream import (
    FileSource,
    PatternReplaySource,
    PhaseError,
    SyntheticSource,
    run_pipeline,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVARIANT = 3

CSV_FIELDS = [
    "batch",
    "runtime_ms",
    "tree_bytes",
    "node_count",
    "new_nodes",
    "dropped_nodes",
    "offline_ms",
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse's default exit code is 2; we use 1
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(prog="tiltstream")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process one stream and emit per-batch stats")
    _add_run_flags(run)

    sweep = sub.add_parser("sweep", help="repeat a run across min-support values")
    _add_run_flags(sweep)
    sweep.add_argument("--sigmas", help="comma-separated min-support fractions")

    oracle = sub.add_parser("oracle", help="check the miner against brute-force counting")
    oracle.add_argument("--runs", type=int, default=200)
    oracle.add_argument("--items", type=int, default=8)
    oracle.add_argument("--transactions", type=int, default=30)
    oracle.add_argument("--max-tx-len", type=int, default=5)
    oracle.add_argument("--seed", type=int, default=1)
    return parser


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with base settings")
    support = p.add_mutually_exclusive_group()
    support.add_argument("--sigma", type=float, help="min-support as a fraction")
    support.add_argument("--sigma-pct", type=float, help="min-support in per cent")
    p.add_argument("--epsilon", type=float, help="max support error; defaults to sigma/2")
    p.add_argument("--window-ms", type=int)
    p.add_argument("--shake-n", type=int)
    p.add_argument("--fading-support", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--order-policy", choices=[policy.value for policy in OrderPolicy])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--synthetic", action="store_true", help="generated stream (default)")
    src.add_argument("--input", metavar="FILE", help="transaction file to replay")
    src.add_argument("--replay-patterns", metavar="FILE", help="pre-mined pattern batches")
    p.add_argument("--rate", type=float, default=200.0, help="transactions per second")
    p.add_argument("--universe", type=int, default=100, help="distinct generated items")
    p.add_argument("--max-tx-len", type=int, default=5)
    p.add_argument("--batch-size", type=int, help="chunk size for file replay")
    p.add_argument("--max-batches", type=int, default=30)
    p.add_argument("--clock", choices=["real", "simulated"], default="simulated")
    p.add_argument("--out", default="-", metavar="FILE", help="stats CSV ('-' = stdout)")
    p.add_argument("--dump-tree", action="store_true", help="print the final tree")
    p.add_argument("--flat-windows", action="store_true", help="disable table compression")


def _build_config(args: argparse.Namespace, sigma_override: float | None = None) -> Config:
    base: dict[str, object] = {}
    if args.config:
        cfg = Config.from_file(args.config)
        base = {
            "sigma": cfg.sigma,
            "epsilon": cfg.epsilon,
            "window_period_ms": cfg.window_period_ms,
            "shake_interval_n": cfg.shake_interval_n,
            "fading_support": cfg.fading_support,
            "seed": cfg.seed,
            "order_policy": cfg.order_policy,
        }
    sigma_from_flags = (
        sigma_override is not None or args.sigma is not None or args.sigma_pct is not None
    )
    sigma = sigma_override
    if sigma is None:
        if args.sigma is not None:
            sigma = args.sigma
        elif args.sigma_pct is not None:
            sigma = args.sigma_pct / 100.0
        else:
            sigma = base.get("sigma", 0.004)
    epsilon = args.epsilon
    if epsilon is None and not sigma_from_flags:
        # a config-file epsilon only applies alongside the file's own sigma
        epsilon = base.get("epsilon")
    if epsilon is None:
        epsilon = sigma / 2.0
    overrides = {
        "sigma": sigma,
        "epsilon": epsilon,
        "window_period_ms": args.window_ms if args.window_ms is not None else base.get("window_period_ms", 5000),
        "shake_interval_n": args.shake_n if args.shake_n is not None else base.get("shake_interval_n", 10),
        "fading_support": args.fading_support if args.fading_support is not None else base.get("fading_support", 2),
        "seed": args.seed if args.seed is not None else base.get("seed", 1),
        "order_policy": OrderPolicy(args.order_policy) if args.order_policy else base.get("order_policy", OrderPolicy.FIRST_BATCH),
    }
    return Config(**overrides)  # type: ignore[arg-type]


def _make_source(args: argparse.Namespace, cfg: Config):
    if args.input:
        return FileSource(args.input, batch_size=args.batch_size)
    if args.replay_patterns:
        return PatternReplaySource(args.replay_patterns)
    return SyntheticSource(
        universe_size=args.universe,
        max_tx_len=args.max_tx_len,
        rate_tx_per_sec=args.rate,
        seed=cfg.seed,
    )


def _stats_row(stats) -> dict[str, str]:
    return {
        "batch": str(stats.batch_index),
        "runtime_ms": f"{stats.runtime_ms:.3f}",
        "tree_bytes": str(stats.tree_bytes),
        "node_count": str(stats.node_count),
        "new_nodes": str(stats.new_nodes),
        "dropped_nodes": str(stats.dropped_nodes),
        "offline_ms": f"{stats.offline_ms:.3f}",
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    source = _make_source(args, cfg)
    out_ctx = (
        nullcontext(sys.stdout)
        if args.out == "-"
        else open(args.out, "w", newline="")
    )
    with out_ctx as out:
        writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        try:
            result = run_pipeline(
                source,
                cfg,
                max_batches=args.max_batches,
                clock=args.clock,
                flat_windows=args.flat_windows,
                on_batch=lambda stats, _tree: writer.writerow(_stats_row(stats)),
            )
        except KeyboardInterrupt:
            print("interrupted; partial stats flushed", file=sys.stderr)
            return 130
    total_drops = sum(s.dropped_nodes for s in result.stats)
    peak_bytes = max((s.tree_bytes for s in result.stats), default=0)
    print(
        f"batches={len(result.stats)} dropped_nodes={total_drops} peak_bytes={peak_bytes} "
        f"offline_ms={result.lattice.total_ms():.3f}",
        file=sys.stderr,
    )
    if args.dump_tree:
        sys.stdout.write(result.tree.dump())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.sigmas or not args.sigmas.strip():
        raise _UsageError("--sigmas requires at least one value")
    sigmas = [float(token) for token in args.sigmas.split(",") if token.strip()]
    if not sigmas:
        raise _UsageError("--sigmas requires at least one value")
    out_ctx = (
        nullcontext(sys.stdout)
        if args.out == "-"
        else open(args.out, "w", newline="")
    )
    with out_ctx as out:
        writer = csv.DictWriter(out, fieldnames=["sigma"] + CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for sigma in sigmas:
            cfg = _build_config(args, sigma_override=sigma)
            source = _make_source(args, cfg)
            result = run_pipeline(
                source,
                cfg,
                max_batches=args.max_batches,
                clock=args.clock,
                flat_windows=args.flat_windows,
            )
            for stats in result.stats:
                writer.writerow({"sigma": f"{sigma:g}", **_stats_row(stats)})
    return EXIT_OK


def run_oracle(
    runs: int,
    items: int,
    transactions: int,
    max_tx_len: int,
    seed: int,
    miner=None,
) -> tuple[bool, str]:
    """Drive miner-vs-oracle comparisons; returns (passed, message)."""
    if items > MAX_ORACLE_ITEMS or transactions > MAX_ORACLE_TRANSACTIONS:
        raise _UsageError(
            f"oracle bounds: at most {MAX_ORACLE_ITEMS} items and "
            f"{MAX_ORACLE_TRANSACTIONS} transactions"
        )
    miner = miner or mine_with_fpgrowth
    rng = random.Random(seed)
    for run in range(runs):
        batch = random_batch(rng, items, transactions, max(1, min(max_tx_len, items)))
        threshold = rng.randint(1, 5)
        mismatch = compare(batch, threshold, miner)
        if mismatch is not None:
            mismatch = minimize(mismatch, miner)
            return False, f"mismatch on run {run}:\n{mismatch.describe()}"
    return True, f"PASS: {runs} batches agree with brute-force counting"


def cmd_oracle(args: argparse.Namespace) -> int:
    passed, message = run_oracle(
        args.runs, args.items, args.transactions, args.max_tx_len, args.seed
    )
    print(message)
    return EXIT_OK if passed else EXIT_INVARIANT


def main(argv: Sequence[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("TILTSTREAM_LOG", "WARNING").upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_oracle(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (PhaseError, SequencingError, ValueError) as err:
        print(f"invariant violation: {err}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
