"""Persistent pattern tree updated incrementally from each mined batch.

Every stored itemset is a root-to-node path (sorted by the frozen item
order on the mining route; in written order on the replay route). Each
node carries a tilted-time table of its batch frequencies and a
time-stamp: the batch index of its last nonzero update, or its creation
batch if it has never received one. Zero updates never touch the stamp;
staleness is exactly ``current_time - timestamp`` in batch units, which
the shaking sweep consumes.

The batch update does, in order:

1. build the batch FP-tree from normalized transactions;
2. mine it at threshold ``ceil(epsilon * |B|)``, and for each mined
   itemset either push its frequency into the existing node (stamping and
   marking it touched) or insert it; an itemset that is absent and below
   the insertion threshold vetoes extension so none of its supersets are
   grown;
3. depth-first scan the whole tree pushing 0 into every node not touched
   this batch, leaving stamps alone;
4. clear the touch marks and advance the tree clock.

No table entries are ever discarded during an update, so every node's
lifetime total is exact; space is reclaimed only at shaking points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .core import Batch, Config, Item, ItemOrder
from .fptree import FPTree, MinedPattern, fpgrowth_mine
from .tilted import TiltedTimeTable

# Analytic size constants, fixed so size telemetry is machine-independent.
NODE_BYTES = 48
ENTRY_BYTES = 12


class SequencingError(RuntimeError):
    """Batches must arrive with consecutive indices."""


class PatternNode:
    __slots__ = ("item", "table", "timestamp", "touched", "children")

    def __init__(self, item: Optional[Item], table: Optional[TiltedTimeTable], timestamp: int):
        self.item = item
        self.table = table
        self.timestamp = timestamp
        self.touched = False
        self.children: dict[Item, PatternNode] = {}


class PatternTree:
    """Prefix-closed tree of tracked itemsets with per-node history tables."""

    def __init__(self, flat_windows: bool = False):
        self.root = PatternNode(None, None, 0)
        self.node_count = 0
        self.current_time = 0
        self.flat_windows = flat_windows

    def find(self, path: Sequence[Item]) -> PatternNode | None:
        node = self.root
        for item in path:
            node = node.children.get(item)
            if node is None:
                return None
        return node

    def items(self) -> Iterator[tuple[tuple[Item, ...], PatternNode]]:
        """Depth-first (path, node) pairs over all non-root nodes."""

        def walk(node: PatternNode, prefix: tuple[Item, ...]):
            for item, child in node.children.items():
                path = prefix + (item,)
                yield path, child
                yield from walk(child, path)

        yield from walk(self.root, ())

    def dump(self) -> str:
        """One line per node, depth-first: ``indent item ts=<n> table=[...]``."""
        lines = [
            f"{'  ' * (len(path) - 1)}{path[-1]} ts={node.timestamp} table=[{node.table.serialize()}]"
            for path, node in self.items()
        ]
        return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class UpdateReport:
    new_nodes: int
    nonzero_updates: int
    zero_updates: int
    mined_patterns: int


def batch_threshold(epsilon: float, batch_size: int) -> int:
    """ceil(epsilon * |B|); the small slack guards float dust on exact products."""
    return max(1, math.ceil(epsilon * batch_size - 1e-9))


class _Updater:
    """One batch's worth of mutation, shared by the mining and replay routes."""

    def __init__(self, tree: PatternTree, batch_index: int):
        if batch_index != tree.current_time + 1:
            raise SequencingError(
                f"batch {batch_index} after time {tree.current_time}; indices must be consecutive"
            )
        self.tree = tree
        self.batch_index = batch_index
        self.created: set[int] = set()
        self.new_nodes = 0
        self.nonzero_updates = 0

    def record(self, path: Sequence[Item], frequency: int) -> None:
        """Push a nonzero frequency at ``path``, creating the path if needed.

        Missing ancestors are created with empty tables and stamped at this
        batch; they stay untouched so the scan gives them their zero entry
        unless their own pattern shows up later in the same batch.
        """
        node = self.tree.root
        for item in path:
            child = node.children.get(item)
            if child is None:
                child = PatternNode(
                    item,
                    TiltedTimeTable(flat=self.tree.flat_windows),
                    self.batch_index,
                )
                node.children[item] = child
                self.tree.node_count += 1
                self.created.add(id(child))
                self.new_nodes += 1
            node = child
        node.table.push(frequency)
        node.timestamp = self.batch_index
        node.touched = True
        if id(node) not in self.created:
            self.nonzero_updates += 1

    def finish(self, mined_patterns: int) -> UpdateReport:
        """Zero-insertion scan, touch-flag reset, clock advance."""
        zero_updates = 0

        def scan(node: PatternNode) -> None:
            nonlocal zero_updates
            for child in node.children.values():
                if child.touched:
                    child.touched = False
                else:
                    child.table.push(0)
                    zero_updates += 1
                scan(child)

        scan(self.tree.root)
        self.tree.current_time = self.batch_index
        return UpdateReport(self.new_nodes, self.nonzero_updates, zero_updates, mined_patterns)


def stream_update(
    tree: PatternTree, batch: Batch, order: ItemOrder, cfg: Config
) -> UpdateReport:
    """Mine one batch of normalized transactions into the tree."""
    updater = _Updater(tree, batch.index)
    mined = 0
    size = len(batch.transactions)
    if size:
        fpt = FPTree(order)
        for transaction in batch.transactions:
            fpt.insert(transaction)
        threshold = batch_threshold(cfg.epsilon, size)

        def visit(pattern: MinedPattern) -> bool:
            path = order.sort_itemset(pattern.itemset)
            if tree.find(path) is None and pattern.frequency < threshold:
                return False
            updater.record(path, pattern.frequency)
            return True

        for _ in fpgrowth_mine(fpt, threshold, visit):
            mined += 1
    return updater.finish(mined)


def inject_patterns(
    tree: PatternTree,
    batch_index: int,
    patterns: Sequence[Sequence[Item]],
    frequency: int = 1,
) -> UpdateReport:
    """Replay route: feed pre-mined patterns instead of mining a batch.

    Each pattern is an ordered item sequence; all of its prefixes are part
    of the tracked set, and each distinct prefix path gets one push of
    ``frequency`` per batch regardless of how many patterns share it.
    """
    updater = _Updater(tree, batch_index)
    paths: dict[tuple[Item, ...], None] = {}
    for pattern in patterns:
        for length in range(1, len(pattern) + 1):
            paths[tuple(pattern[:length])] = None
    for path in paths:
        updater.record(path, frequency)
    return updater.finish(len(paths))


def tree_size_bytes(tree: PatternTree) -> int:
    """Analytic size: nodes plus table entries at the documented constants."""
    entries = sum(len(node.table) for _, node in tree.items())
    return tree.node_count * NODE_BYTES + entries * ENTRY_BYTES


def report_frequent(
    tree: PatternTree,
    sigma: float,
    window_k: int,
    window_transactions: int,
) -> list[tuple[tuple[Item, ...], int, bool]]:
    """Stored itemsets whose count over the last ``window_k`` batches meets
    ``sigma`` as a fraction of ``window_transactions`` (the transaction total
    of those batches, tracked by the caller's batch bookkeeping).

    Returns (itemset, count, approximate) sorted by count descending then
    lexicographically; itemsets are reported in sorted-item form.
    """
    if window_k < 1:
        raise ValueError("window must cover at least one batch")
    needed = sigma * window_transactions - 1e-9
    found = []
    for path, node in tree.items():
        count, approximate = node.table.query(window_k)
        if count >= needed:
            found.append((tuple(sorted(path)), count, approximate))
    found.sort(key=lambda row: (-row[1], row[0]))
    return found
