"""Domain types shared by every other module.

Items are opaque string tokens; a transaction is a duplicate-free tuple of
items; a batch is the set of transactions collected in one stream window.
All ordering questions go through :class:`ItemOrder`, which is built once
from the first non-empty batch and frozen for the life of the run.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

Item = str
Transaction = tuple[Item, ...]

# Stream delimiter token; never a valid item.
TRANSACTION_MARK = "x"


class ConfigError(ValueError):
    """Invalid configuration value or configuration file."""


class EmptyBatchError(ValueError):
    """An item order was requested from a batch that contains no items."""


class OrderPolicy(str, Enum):
    """How the global item order (f-list) is derived."""

    FIRST_BATCH = "first-batch"
    LEXICOGRAPHIC = "lexicographic"


def validate_item(token: str) -> Item:
    """Check a raw token and return it unchanged.

    The delimiter token and the empty string are rejected; anything else is
    an acceptable item.
    """
    if not token:
        raise ValueError("empty item token")
    if token == TRANSACTION_MARK:
        raise ValueError(
            f"{TRANSACTION_MARK!r} delimits transactions and is not a valid item"
        )
    return token


@dataclass(frozen=True)
class Batch:
    """Transactions collected in one window.

    ``index`` is 1-based and increases by exactly 1 between consecutive
    batches of a run. ``wall_duration_ms`` records how long the window was
    open (0 for window-free file replay).
    """

    index: int
    transactions: tuple[Transaction, ...]
    wall_duration_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("batch index is 1-based")

    def __len__(self) -> int:
        return len(self.transactions)


@dataclass(frozen=True)
class Config:
    """Run parameters.

    ``sigma`` and ``epsilon`` are fractions of the batch size, with
    0 < epsilon <= sigma < 1. ``shake_interval_n`` is the number of batches
    between shaking points and ``fading_support`` the staleness threshold
    (in batches) at which a node is dropped.
    """

    sigma: float = 0.004
    epsilon: float = 0.002
    window_period_ms: int = 5000
    shake_interval_n: int = 10
    fading_support: int = 2
    seed: int = 1
    order_policy: OrderPolicy = OrderPolicy.FIRST_BATCH

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon <= self.sigma < 1.0):
            raise ConfigError(
                f"need 0 < epsilon <= sigma < 1, got epsilon={self.epsilon}, sigma={self.sigma}"
            )
        if self.window_period_ms <= 0:
            raise ConfigError("window_period_ms must be positive")
        if self.shake_interval_n < 1:
            raise ConfigError("shake_interval_n must be >= 1")
        if self.fading_support < 1:
            raise ConfigError("fading_support must be >= 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "Config":
        """Build a Config from string key/value pairs (as read from a file)."""
        coerced: dict[str, object] = {}
        known = {f.name: f.type for f in fields(cls)}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "order_policy":
                try:
                    coerced[key] = OrderPolicy(raw)
                except ValueError:
                    choices = ", ".join(p.value for p in OrderPolicy)
                    raise ConfigError(
                        f"order_policy must be one of: {choices}"
                    ) from None
            elif key in ("sigma", "epsilon"):
                coerced[key] = float(raw)
            else:
                coerced[key] = int(raw)
        return cls(**coerced)  # type: ignore[arg-type]

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        """Load a plain ``key=value`` file; blank lines and ``#`` comments allowed."""
        values: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
        return cls.from_mapping(values)


@dataclass(frozen=True)
class ItemOrder:
    """Total, frozen order over the open item universe.

    Items seen when the order was built carry a dense rank; any item that
    appears later sorts after all ranked items, lexicographically. A purely
    lexicographic order is the degenerate case with no ranked items.
    """

    ranks: dict[Item, int] = field(default_factory=dict)

    def key(self, item: Item) -> tuple[int, int, Item]:
        rank = self.ranks.get(item)
        if rank is None:
            return (1, 0, item)
        return (0, rank, "")

    def sort_itemset(self, items: Iterable[Item]) -> Transaction:
        """Deduplicate and sort items into canonical (rank-ascending) form."""
        return tuple(sorted(set(items), key=self.key))


def build_item_order(first_batch: Batch, policy: OrderPolicy) -> ItemOrder:
    """Derive the frozen item order from the first non-empty batch.

    FIRST_BATCH ranks items by descending per-transaction occurrence count,
    ties broken lexicographically; LEXICOGRAPHIC ignores the data entirely.
    """
    if policy is OrderPolicy.LEXICOGRAPHIC:
        return ItemOrder()
    counts: Counter[Item] = Counter()
    for transaction in first_batch.transactions:
        counts.update(set(transaction))
    if not counts:
        raise EmptyBatchError("cannot derive order from empty batch")
    ordered = sorted(counts, key=lambda item: (-counts[item], item))
    return ItemOrder(ranks={item: pos for pos, item in enumerate(ordered)})


def normalize_transaction(raw: Sequence[Item], order: ItemOrder) -> Transaction:
    """Collapse duplicates and sort by the frozen order. Idempotent."""
    return order.sort_itemset(raw)


def is_normalized(transaction: Sequence[Item], order: ItemOrder) -> bool:
    keys = [order.key(item) for item in transaction]
    return all(a < b for a, b in zip(keys, keys[1:]))
