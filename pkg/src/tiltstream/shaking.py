"""Periodic sweep that drops stale subtrees from the pattern tree.

Every N batches the tree is scanned depth-first from the root. A node
whose staleness (current batch index minus its time-stamp) has reached
the fading support is removed together with its entire subtree, and the
sweep does not descend into it; otherwise the sweep recurses. The root
itself is never dropped.

Note the skip is a policy, not an inference: a descendant can carry a
fresher stamp than its parent (a superset can be updated in a batch where
the subset pattern was not stored as frequent on its own), and such a
descendant is dropped with the faded parent anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Config
from .fpstream import ENTRY_BYTES, NODE_BYTES, PatternNode, PatternTree


@dataclass(frozen=True)
class ShakeReport:
    visited: int
    dropped: int
    bytes_freed: int


def shaking_point(tree: PatternTree, cfg: Config) -> ShakeReport:
    """Drop every subtree rooted at a node with staleness >= fading_support."""
    current = tree.current_time
    visited = 0
    dropped = 0
    freed = 0

    def subtree_cost(node: PatternNode) -> tuple[int, int]:
        nodes, entries = 1, len(node.table)
        for child in node.children.values():
            child_nodes, child_entries = subtree_cost(child)
            nodes += child_nodes
            entries += child_entries
        return nodes, entries

    def sweep(node: PatternNode) -> None:
        nonlocal visited, dropped, freed
        for item in list(node.children):
            child = node.children[item]
            visited += 1
            if current - child.timestamp >= cfg.fading_support:
                nodes, entries = subtree_cost(child)
                del node.children[item]
                dropped += nodes
                freed += nodes * NODE_BYTES + entries * ENTRY_BYTES
            else:
                sweep(child)

    sweep(tree.root)
    tree.node_count -= dropped
    return ShakeReport(visited, dropped, freed)
