"""Stream sources, windowed batch collection, and the processing loop.

The loop alternates two strictly exclusive phases: receive (fill a batch
for one window period) and mine (update the pattern tree, shake when
due). While mining, the stream keeps flowing unreceived; the time lost is
recorded per batch in the OffC lattice.

Two clocks exist. The real clock paces reception against wall time and
measures mining with a wall timer. The simulated clock makes runs fully
deterministic: a window yields exactly ``floor(rate * window / 1000)``
transactions, and mining time is charged from a fixed per-operation cost
model over the work actually performed (items inserted into the batch
tree, patterns mined, table pushes, shake visits and drops), so repeated
runs produce byte-identical telemetry.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .core import (
    Batch,
    Config,
    EmptyBatchError,
    Item,
    ItemOrder,
    TRANSACTION_MARK,
    build_item_order,
    normalize_transaction,
    validate_item,
)
from .fpstream import (
    PatternTree,
    inject_patterns,
    stream_update,
    tree_size_bytes,
)
from .shaking import ShakeReport, shaking_point

log = logging.getLogger(__name__)

SIMULATED = "simulated"
REAL = "real"

# Simulated-clock cost model, microseconds per unit of work.
US_PER_TREE_ITEM = 1.0
US_PER_MINED_PATTERN = 2.0
US_PER_TABLE_TOUCH = 0.5
US_PER_SHAKE_VISIT = 0.5
US_PER_DROP = 1.0


class PhaseError(RuntimeError):
    """Receive and mine phases overlapped or repeated."""


@dataclass
class BatchStats:
    """Per-batch telemetry row.

    ``runtime_ms`` covers mining, tree update and shaking, never stream
    reading. ``tree_bytes``/``node_count`` are sampled after the update and
    before the shake, so a shake's effect shows up in the next row.
    """

    batch_index: int
    runtime_ms: float
    tree_bytes: int
    node_count: int
    new_nodes: int
    dropped_nodes: int
    offline_ms: float


class OffcLattice:
    """Append-only record of stream time lost while mining, per batch."""

    def __init__(self) -> None:
        self.entries: list[tuple[int, float]] = []

    def record(self, batch_index: int, offline_ms: float) -> None:
        if offline_ms < 0:
            raise ValueError("offline time cannot be negative")
        self.entries.append((batch_index, offline_ms))

    def total_ms(self) -> float:
        return sum(offline for _, offline in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def parse_transactions(text: str) -> tuple[list[list[Item]], int]:
    """Parse stream text into transactions.

    Tokens are whitespace separated; the ``x`` mark ends a transaction, and
    so does a line break (one-transaction-per-line files need no marks).
    Returns the transactions and the number of empty ones dropped.
    """
    transactions: list[list[Item]] = []
    dropped = 0
    for line in text.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        current: list[Item] = []
        for token in tokens:
            if token == TRANSACTION_MARK:
                if current:
                    transactions.append(current)
                    current = []
                else:
                    dropped += 1
            else:
                current.append(validate_item(token))
        if current:
            transactions.append(current)
    return transactions, dropped


def parse_pattern_batches(text: str) -> list[list[list[Item]]]:
    """Parse a pattern replay file: one batch per line, patterns separated
    by the ``x`` mark, each pattern an ordered item sequence."""
    batches: list[list[list[Item]]] = []
    for line in text.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        patterns: list[list[Item]] = []
        current: list[Item] = []
        for token in tokens:
            if token == TRANSACTION_MARK:
                if current:
                    patterns.append(current)
                    current = []
            else:
                current.append(validate_item(token))
        if current:
            patterns.append(current)
        if patterns:
            batches.append(patterns)
    return batches


class SyntheticSource:
    """Endless generator of random transactions at a constant rate."""

    kind = "transactions"

    def __init__(
        self,
        universe_size: int,
        max_tx_len: int,
        rate_tx_per_sec: float,
        seed: int,
    ):
        if universe_size < 1 or max_tx_len < 1:
            raise ValueError("universe and transaction length must be >= 1")
        self.universe = [f"i{k}" for k in range(universe_size)]
        self.max_tx_len = max_tx_len
        self.rate = rate_tx_per_sec
        self.rng = random.Random(seed)

    def _generate(self, count: int) -> list[list[Item]]:
        return [
            self.rng.choices(self.universe, k=self.rng.randint(1, self.max_tx_len))
            for _ in range(count)
        ]

    def fill(self, window_ms: float, clock: str) -> list[list[Item]] | None:
        count = int(self.rate * window_ms / 1000.0)
        if clock == REAL:
            started = time.perf_counter()
            transactions = self._generate(count)
            remaining = window_ms / 1000.0 - (time.perf_counter() - started)
            if remaining > 0:
                time.sleep(remaining)
            return transactions
        return self._generate(count)


class FileSource:
    """Window-free replay of a transaction file, whole or in fixed chunks."""

    kind = "transactions"

    def __init__(self, path: str | Path, batch_size: int | None = None):
        text = Path(path).read_text()
        self.transactions, self.dropped_empty = parse_transactions(text)
        if self.dropped_empty:
            log.warning("dropped %d empty transactions from %s", self.dropped_empty, path)
        if batch_size is not None and batch_size < 1:
            raise ValueError("batch size must be >= 1")
        self.batch_size = batch_size
        self._cursor = 0

    def fill(self, window_ms: float, clock: str) -> list[list[Item]] | None:
        if self._cursor >= len(self.transactions):
            return None
        if self.batch_size is None:
            chunk = self.transactions[self._cursor :]
        else:
            chunk = self.transactions[self._cursor : self._cursor + self.batch_size]
        self._cursor += len(chunk)
        return chunk


class PatternReplaySource:
    """Replays pre-mined pattern batches, bypassing the miner."""

    kind = "patterns"

    def __init__(self, path: str | Path):
        self.batches = parse_pattern_batches(Path(path).read_text())
        self._cursor = 0

    def fill(self, window_ms: float, clock: str) -> list[list[Item]] | None:
        if self._cursor >= len(self.batches):
            return None
        batch = self.batches[self._cursor]
        self._cursor += 1
        return batch


def next_batch(source, window_ms: float, index: int, clock: str = SIMULATED) -> Batch | None:
    """Collect one window's worth of transactions; None signals end of stream."""
    raw = source.fill(window_ms, clock)
    if raw is None:
        return None
    wall = window_ms if isinstance(source, SyntheticSource) else 0.0
    return Batch(
        index=index,
        transactions=tuple(tuple(t) for t in raw),
        wall_duration_ms=wall,
    )


@dataclass
class PipelineResult:
    tree: PatternTree
    order: Optional[ItemOrder]
    stats: list[BatchStats] = field(default_factory=list)
    lattice: OffcLattice = field(default_factory=OffcLattice)
    batch_sizes: list[int] = field(default_factory=list)
    phase_transitions: int = 0


def run_pipeline(
    source,
    cfg: Config,
    *,
    max_batches: int | None = None,
    clock: str = SIMULATED,
    flat_windows: bool = False,
    on_batch: Callable[[BatchStats, PatternTree], None] | None = None,
) -> PipelineResult:
    """Receive/mine loop: fill a batch per window, update the tree, shake
    every N batches, record stats and offline time until the source ends or
    ``max_batches`` is reached."""
    if clock not in (SIMULATED, REAL):
        raise ValueError(f"unknown clock {clock!r}")
    result = PipelineResult(tree=PatternTree(flat_windows=flat_windows), order=None)
    replay = source.kind == "patterns"
    phase = "idle"

    def enter(next_phase: str) -> None:
        nonlocal phase
        expected = {"receive": ("idle", "mine"), "mine": ("receive",)}
        if phase not in expected[next_phase]:
            raise PhaseError(f"cannot enter {next_phase} phase from {phase}")
        phase = next_phase
        result.phase_transitions += 1

    index = 0
    while max_batches is None or index < max_batches:
        enter("receive")
        raw = source.fill(cfg.window_period_ms, clock)
        if raw is None:
            break
        if not raw:
            log.warning("window %d collected no transactions; stopping", index + 1)
            break
        index += 1

        enter("mine")
        mine_start = time.perf_counter()
        if replay:
            report = inject_patterns(result.tree, index, raw)
            work_items = 0
            batch_size = len(raw)
        else:
            if result.order is None:
                try:
                    result.order = build_item_order(
                        Batch(index=index, transactions=tuple(tuple(t) for t in raw)),
                        cfg.order_policy,
                    )
                except EmptyBatchError:
                    log.warning("batch %d had no items; retrying on next batch", index)
                    index -= 1
                    continue
            normalized = tuple(
                normalize_transaction(t, result.order) for t in raw
            )
            batch = Batch(
                index=index,
                transactions=normalized,
                wall_duration_ms=cfg.window_period_ms if isinstance(source, SyntheticSource) else 0.0,
            )
            report = stream_update(result.tree, batch, result.order, cfg)
            work_items = sum(len(t) for t in normalized)
            batch_size = len(normalized)

        update_elapsed = time.perf_counter() - mine_start

        # Sampled before the shake: the shake's effect shows in the next row.
        pre_shake_bytes = tree_size_bytes(result.tree)
        pre_shake_nodes = result.tree.node_count

        shake: ShakeReport | None = None
        shake_start = time.perf_counter()
        if index % cfg.shake_interval_n == 0:
            shake = shaking_point(result.tree, cfg)
        shake_elapsed = time.perf_counter() - shake_start

        if clock == SIMULATED:
            cost_us = (
                work_items * US_PER_TREE_ITEM
                + report.mined_patterns * US_PER_MINED_PATTERN
                + (report.new_nodes + report.nonzero_updates + report.zero_updates)
                * US_PER_TABLE_TOUCH
            )
            if shake is not None:
                cost_us += shake.visited * US_PER_SHAKE_VISIT + shake.dropped * US_PER_DROP
            runtime_ms = cost_us / 1000.0
            offline_ms = runtime_ms
        else:
            # runtime covers the algorithmic work; offline covers the whole
            # mine phase, during which the stream keeps flowing unreceived
            runtime_ms = (update_elapsed + shake_elapsed) * 1000.0
            offline_ms = (time.perf_counter() - mine_start) * 1000.0

        result.lattice.record(index, offline_ms)
        result.batch_sizes.append(batch_size)
        stats = BatchStats(
            batch_index=index,
            runtime_ms=runtime_ms,
            tree_bytes=pre_shake_bytes,
            node_count=pre_shake_nodes,
            new_nodes=report.new_nodes,
            dropped_nodes=shake.dropped if shake is not None else 0,
            offline_ms=offline_ms,
        )
        result.stats.append(stats)
        if on_batch is not None:
            on_batch(stats, result.tree)
    return result
