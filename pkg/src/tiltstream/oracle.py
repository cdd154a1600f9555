"""Brute-force subset-counting oracle.

The oracle defines pattern frequency by enumeration: every nonempty
subset of every transaction is counted. It is deliberately independent
of the FP-tree path and is only usable at small scale, which the public
entry points enforce.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

from .core import Batch, Item, OrderPolicy, build_item_order, normalize_transaction
from .fptree import FPTree, mine_to_dict

MAX_ORACLE_ITEMS = 12
MAX_ORACLE_TRANSACTIONS = 50

Miner = Callable[[Sequence[Sequence[Item]], int], dict[frozenset, int]]


class OracleBoundsError(ValueError):
    """The requested problem size is too large for subset enumeration."""


def subset_frequencies(
    transactions: Sequence[Sequence[Item]], threshold: int
) -> dict[frozenset, int]:
    """Count every subset of every transaction; keep those >= threshold."""
    distinct = {item for transaction in transactions for item in transaction}
    if len(distinct) > MAX_ORACLE_ITEMS:
        raise OracleBoundsError(f"oracle limited to {MAX_ORACLE_ITEMS} distinct items")
    if len(transactions) > MAX_ORACLE_TRANSACTIONS:
        raise OracleBoundsError(
            f"oracle limited to {MAX_ORACLE_TRANSACTIONS} transactions"
        )
    counts: Counter[tuple[Item, ...]] = Counter()
    for transaction in transactions:
        items = sorted(set(transaction))
        for size in range(1, len(items) + 1):
            counts.update(combinations(items, size))
    return {
        frozenset(itemset): count
        for itemset, count in counts.items()
        if count >= threshold
    }


def mine_with_fpgrowth(
    transactions: Sequence[Sequence[Item]], threshold: int
) -> dict[frozenset, int]:
    """Reference miner wired the same way the pipeline wires it."""
    batch = Batch(index=1, transactions=tuple(tuple(t) for t in transactions))
    order = build_item_order(batch, OrderPolicy.FIRST_BATCH)
    tree = FPTree(order)
    for transaction in transactions:
        tree.insert(normalize_transaction(transaction, order))
    return mine_to_dict(tree, threshold)


def random_batch(
    rng: random.Random, n_items: int, n_transactions: int, max_len: int
) -> list[list[Item]]:
    universe = [f"i{k}" for k in range(n_items)]
    return [
        rng.choices(universe, k=rng.randint(1, max_len))
        for _ in range(n_transactions)
    ]


@dataclass
class Mismatch:
    transactions: list[list[Item]]
    threshold: int
    missing: dict[frozenset, int]
    unexpected: dict[frozenset, int]
    wrong_count: dict[frozenset, tuple[int, int]]

    def describe(self) -> str:
        lines = [f"threshold={self.threshold}"]
        for transaction in self.transactions:
            lines.append(" ".join(transaction) + " x")
        for label, bucket in (
            ("missing", self.missing),
            ("unexpected", self.unexpected),
        ):
            for itemset, count in sorted(bucket.items(), key=lambda kv: sorted(kv[0])):
                lines.append(f"{label}: {{{','.join(sorted(itemset))}}} = {count}")
        for itemset, (want, got) in sorted(
            self.wrong_count.items(), key=lambda kv: sorted(kv[0])
        ):
            lines.append(f"wrong count: {{{','.join(sorted(itemset))}}} want {want} got {got}")
        return "\n".join(lines)


def compare(
    transactions: Sequence[Sequence[Item]],
    threshold: int,
    miner: Miner = mine_with_fpgrowth,
) -> Mismatch | None:
    """Run miner and oracle on one batch; None means they agree exactly."""
    expected = subset_frequencies(transactions, threshold)
    actual = miner(transactions, threshold)
    if actual == expected:
        return None
    missing = {k: v for k, v in expected.items() if k not in actual}
    unexpected = {k: v for k, v in actual.items() if k not in expected}
    wrong = {
        k: (expected[k], actual[k])
        for k in expected.keys() & actual.keys()
        if expected[k] != actual[k]
    }
    return Mismatch(
        [list(t) for t in transactions], threshold, missing, unexpected, wrong
    )


def minimize(mismatch: Mismatch, miner: Miner = mine_with_fpgrowth) -> Mismatch:
    """Greedily drop transactions while the disagreement persists."""
    current = mismatch
    shrinking = True
    while shrinking and len(current.transactions) > 1:
        shrinking = False
        for skip in range(len(current.transactions)):
            candidate = current.transactions[:skip] + current.transactions[skip + 1 :]
            found = compare(candidate, current.threshold, miner)
            if found is not None:
                current = found
                shrinking = True
                break
    return current
