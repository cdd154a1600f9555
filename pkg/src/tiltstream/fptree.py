"""Per-batch transaction tree and FP-growth mining.

The tree compresses one batch of normalized transactions into a prefix
tree with a header table (item -> all nodes carrying that item). Mining
enumerates every itemset whose transaction count meets an absolute
threshold, each exactly once with its exact count.

Mining is visitor-driven: patterns are yielded in suffix-extension order
(a pattern always before the supersets grown from it), and an optional
``visit`` callback can veto extension of a pattern, in which case no
superset reachable only by extending that pattern is produced. The
pattern-tree update uses this hook to stop growing patterns it will not
store.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

from .core import Item, ItemOrder, is_normalized


class MinedPattern(NamedTuple):
    itemset: frozenset[Item]
    frequency: int


Visitor = Callable[[MinedPattern], bool]


class FPNode:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item: Optional[Item], count: int, parent: Optional["FPNode"]):
        self.item = item
        self.count = count
        self.parent = parent
        self.children: dict[Item, FPNode] = {}

    def __repr__(self) -> str:  # pragma: no cover
        return f"<FPNode {self.item!r} ({self.count})>"


class FPTree:
    """Prefix tree over one batch, keyed by the frozen item order."""

    def __init__(self, order: ItemOrder):
        self.order = order
        self.root = FPNode(None, 0, None)
        self.header: dict[Item, list[FPNode]] = {}
        self.transaction_count = 0

    def insert(self, transaction: Sequence[Item]) -> None:
        """Add one normalized transaction; counts along its path increment by 1."""
        if not is_normalized(transaction, self.order):
            raise ValueError(f"transaction {transaction!r} violates the item order")
        self.transaction_count += 1
        node = self.root
        for item in transaction:
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, 0, node)
                node.children[item] = child
                self.header.setdefault(item, []).append(child)
            child.count += 1
            node = child

    def item_support(self, item: Item) -> int:
        return sum(node.count for node in self.header.get(item, ()))


def fpgrowth_mine(
    tree: FPTree, threshold: int, visit: Visitor | None = None
) -> Iterator[MinedPattern]:
    """Yield every itemset with batch frequency >= ``threshold``.

    ``visit`` is called on each pattern as it is produced; returning False
    stops extension of that pattern (its extension-only supersets are
    skipped). With no visitor every pattern is extended.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    yield from _mine(tree.root, tree.header, frozenset(), threshold, visit, tree.order.key)


def mine_to_dict(tree: FPTree, threshold: int) -> dict[frozenset[Item], int]:
    """Convenience: full itemset -> frequency map for the batch."""
    return {pattern.itemset: pattern.frequency for pattern in fpgrowth_mine(tree, threshold)}


def _mine(root, header, suffix, threshold, visit, key) -> Iterator[MinedPattern]:
    path = _single_path(root)
    if path is not None:
        yield from _mine_single_path(path, suffix, threshold, visit)
        return
    # Deepest-ranked items first; each conditional tree then only contains
    # items ranked before the current one.
    for item in sorted(header, key=key, reverse=True):
        nodes = header[item]
        support = sum(node.count for node in nodes)
        if support < threshold:
            continue
        pattern = MinedPattern(suffix | {item}, support)
        yield pattern
        if visit is not None and not visit(pattern):
            continue
        cond_root, cond_header = _conditional(nodes, threshold)
        yield from _mine(cond_root, cond_header, pattern.itemset, threshold, visit, key)


def _single_path(root: FPNode) -> list[tuple[Item, int]] | None:
    """Return the [(item, count), ...] chain if the tree is one path, else None."""
    path: list[tuple[Item, int]] = []
    node = root
    while node.children:
        if len(node.children) > 1:
            return None
        node = next(iter(node.children.values()))
        path.append((node.item, node.count))
    return path


def _mine_single_path(path, suffix, threshold, visit) -> Iterator[MinedPattern]:
    # Counts never increase with depth, so a subset's frequency is the count
    # of its deepest chosen item. Extending only with shallower items keeps
    # the frequency fixed and mirrors the conditional-tree recursion exactly,
    # including which supersets a vetoed pattern suppresses.
    def extend(limit: int, itemset: frozenset, frequency: int) -> Iterator[MinedPattern]:
        for shallower in range(limit - 1, -1, -1):
            pattern = MinedPattern(itemset | {path[shallower][0]}, frequency)
            yield pattern
            if visit is None or visit(pattern):
                yield from extend(shallower, pattern.itemset, frequency)

    for deepest in range(len(path) - 1, -1, -1):
        item, count = path[deepest]
        if count < threshold:
            continue
        pattern = MinedPattern(suffix | {item}, count)
        yield pattern
        if visit is None or visit(pattern):
            yield from extend(deepest, pattern.itemset, count)


def _conditional(nodes: list[FPNode], threshold: int):
    """Build the conditional tree for one header chain (prefix paths, weighted)."""
    paths: list[tuple[list[Item], int]] = []
    support: Counter[Item] = Counter()
    for node in nodes:
        items: list[Item] = []
        parent = node.parent
        while parent is not None and parent.item is not None:
            items.append(parent.item)
            parent = parent.parent
        if items:
            items.reverse()
            paths.append((items, node.count))
            for item in items:
                support[item] += node.count
    keep = {item for item, total in support.items() if total >= threshold}
    root = FPNode(None, 0, None)
    header: dict[Item, list[FPNode]] = {}
    for items, weight in paths:
        node = root
        for item in items:
            if item not in keep:
                continue
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, 0, node)
                node.children[item] = child
                header.setdefault(item, []).append(child)
            child.count += weight
            node = child
    return root, header
