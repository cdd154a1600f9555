import random
from pathlib import Path

import pytest

from tiltstream.core import Batch, Config, OrderPolicy, build_item_order, normalize_transaction
from tiltstream.fpstream import (
    PatternTree,
    SequencingError,
    batch_threshold,
    inject_patterns,
    report_frequent,
    stream_update,
    tree_size_bytes,
)
from tiltstream.oracle import random_batch, subset_frequencies
from tiltstream.tilted import Entry

DATA = Path(__file__).parent / "data"

GOLDEN_BATCHES = [
    [["A", "C", "D"], ["E", "V"], ["A", "C", "J"], ["B", "F", "A"]],
    [["E", "V", "D"], ["A"], ["B", "F", "C"]],
    [["E", "V", "D", "C"], ["B", "F", "A"], ["A", "H"]],
]


def golden_tree(through_batch):
    tree = PatternTree(flat_windows=True)
    reports = []
    for index in range(1, through_batch + 1):
        reports.append(inject_patterns(tree, index, GOLDEN_BATCHES[index - 1]))
    return tree, reports


def paths_with(tree, predicate):
    return {path for path, node in tree.items() if predicate(node)}


def test_golden_batch_1_all_new():
    tree, reports = golden_tree(1)
    assert reports[0].new_nodes == 9
    assert reports[0].nonzero_updates == 0
    assert reports[0].zero_updates == 0
    assert tree.node_count == 9
    assert all(node.timestamp == 1 for _, node in tree.items())


def test_golden_batch_2_faded_set():
    tree, reports = golden_tree(2)
    assert reports[1].new_nodes == 2  # D under EV, C under BF
    assert reports[1].nonzero_updates == 5  # E, EV, A, B, BF
    assert reports[1].zero_updates == 4  # AC, ACD, ACJ, BFA
    stale = paths_with(tree, lambda node: node.timestamp == 1)
    assert stale == {("A", "C"), ("A", "C", "D"), ("A", "C", "J"), ("B", "F", "A")}
    fresh = paths_with(tree, lambda node: node.timestamp == 2)
    assert fresh == {("A",), ("E",), ("E", "V"), ("E", "V", "D"), ("B",), ("B", "F"), ("B", "F", "C")}


def test_golden_batch_3_faded_set():
    tree, reports = golden_tree(3)
    assert reports[2].new_nodes == 2  # C under EVD, H under A
    assert reports[2].nonzero_updates == 7  # E, EV, EVD, B, BF, BFA, A
    assert reports[2].zero_updates == 4  # AC, ACD, ACJ, BFC
    stale = paths_with(tree, lambda node: node.timestamp < 3)
    assert stale == {
        ("A", "C"),
        ("A", "C", "D"),
        ("A", "C", "J"),
        ("B", "F", "C"),
    }
    assert tree.find(("B", "F", "C")).timestamp == 2
    assert tree.node_count == 13


def test_golden_flat_tables_keep_exact_traces():
    tree, _ = golden_tree(3)
    assert tree.find(("B", "F", "A")).table.entries == [Entry(1, 1), Entry(1, 0), Entry(1, 1)]
    assert tree.find(("B", "F", "C")).table.entries == [Entry(1, 0), Entry(1, 1)]
    assert tree.find(("A",)).table.entries == [Entry(1, 1), Entry(1, 1), Entry(1, 1)]


def test_sequencing_enforced():
    tree, _ = golden_tree(1)
    with pytest.raises(SequencingError):
        inject_patterns(tree, 3, [["A"]])
    batch = Batch(index=5, transactions=(("A",),))
    order = build_item_order(batch, OrderPolicy.LEXICOGRAPHIC)
    with pytest.raises(SequencingError):
        stream_update(tree, batch, order, Config())


def test_tree_size_examples():
    assert tree_size_bytes(PatternTree()) == 0
    tree = PatternTree(flat_windows=True)
    inject_patterns(tree, 1, [["A"]])
    assert tree_size_bytes(tree) == 60
    golden, _ = golden_tree(1)
    assert tree_size_bytes(golden) == 540  # 9 nodes, 9 entries
    golden3, _ = golden_tree(3)
    assert tree_size_bytes(golden3) == 1020  # 13 nodes, 33 entries


def test_batch_threshold_ceiling():
    assert batch_threshold(0.001, 1000) == 1
    assert batch_threshold(0.0015, 1000) == 2
    assert batch_threshold(0.002, 1000) == 2
    assert batch_threshold(0.5, 3) == 2
    assert batch_threshold(0.9, 1) == 1


def mined_update(tree, index, transactions, epsilon=0.1, order=None):
    batch = Batch(index=index, transactions=tuple(tuple(t) for t in transactions))
    if order is None:
        order = build_item_order(batch, OrderPolicy.FIRST_BATCH)
    normalized = tuple(normalize_transaction(t, order) for t in batch.transactions)
    cfg = Config(sigma=max(epsilon, 0.5), epsilon=epsilon)
    report = stream_update(tree, Batch(index=index, transactions=normalized), order, cfg)
    return report, order


def test_mining_route_builds_prefix_closed_tree():
    tree = PatternTree()
    report, _ = mined_update(tree, 1, GOLDEN_BATCHES[0], epsilon=0.1)
    # threshold 1: every distinct subset of a transaction becomes a node
    assert report.mined_patterns == 20
    assert tree.node_count == 20
    stored = {path for path, _ in tree.items()}
    for path in stored:
        for cut in range(1, len(path)):
            assert path[:cut] in stored


def test_report_frequent_examples():
    tree = PatternTree(flat_windows=True)
    inject_patterns(tree, 1, [["A"]], frequency=10)
    assert report_frequent(tree, 0.5, 1, 10) == [(("A",), 10, False)]
    assert report_frequent(tree, 1.0, 1, 11) == []

    mined = PatternTree()
    mined_update(mined, 1, GOLDEN_BATCHES[0], epsilon=0.1)
    rows = report_frequent(mined, 0.5, 1, 4)  # threshold = 2 of 4 transactions
    assert [(set(itemset), count) for itemset, count, _ in rows] == [
        ({"A"}, 3),
        ({"A", "C"}, 2),
        ({"C"}, 2),
    ]
    assert all(not approximate for _, _, approximate in rows)
    with pytest.raises(ValueError):
        report_frequent(mined, 0.5, 0, 4)


def test_dump_format_small_case():
    tree = PatternTree(flat_windows=True)
    inject_patterns(tree, 1, [["B", "A"]])
    inject_patterns(tree, 2, [["B"]])
    assert tree.dump() == (
        "B ts=2 table=[1:1,1:1]\n"
        "  A ts=1 table=[1:0,1:1]\n"
    )


def test_fig6_fixture_after_shake():
    from tiltstream.shaking import shaking_point

    tree, _ = golden_tree(3)
    cfg = Config(fading_support=2, shake_interval_n=3)
    report = shaking_point(tree, cfg)
    assert report.dropped == 3
    assert tree.dump() == (DATA / "fig6_tree.txt").read_text()


class TrackingOracle:
    """Replays updates keeping independently-computed expectations."""

    def __init__(self, epsilon):
        self.epsilon = epsilon
        self.created = {}
        self.timestamps = {}
        self.pushed = {}

    def apply(self, index, transactions, order):
        threshold = batch_threshold(self.epsilon, len(transactions))
        frequent = subset_frequencies(transactions, threshold)
        for itemset, frequency in frequent.items():
            path = order.sort_itemset(itemset)
            for cut in range(1, len(path) + 1):
                self.created.setdefault(path[:cut], index)
                self.timestamps.setdefault(path[:cut], index)
            self.timestamps[path] = index
            self.pushed.setdefault(path, []).append((index, frequency))
        return frequent


def test_update_laws_against_tracking_oracle():
    rng = random.Random(11)
    tree = PatternTree()
    epsilon = 0.15
    first = random_batch(rng, 9, 25, 5)
    order = build_item_order(
        Batch(index=1, transactions=tuple(tuple(t) for t in first)), OrderPolicy.FIRST_BATCH
    )
    oracle = TrackingOracle(epsilon)
    for index in range(1, 9):
        transactions = first if index == 1 else random_batch(rng, 9, 25, 5)
        normalized = tuple(normalize_transaction(t, order) for t in transactions)
        cfg = Config(sigma=0.5, epsilon=epsilon)
        stream_update(tree, Batch(index=index, transactions=normalized), order, cfg)
        frequent = oracle.apply(index, transactions, order)

        # Nonzero pushes this batch are exactly the oracle's frequent sets.
        nonzero = {
            path: node.table.entries[0].frequency
            for path, node in tree.items()
            if node.table.entries[0] == (1, node.table.entries[0].frequency)
            and node.table.entries[0].frequency > 0
        }
        expected = {order.sort_itemset(i): f for i, f in frequent.items()}
        assert nonzero == expected

        stored = {path for path, _ in tree.items()}
        for path, node in tree.items():
            # prefix closure
            for cut in range(1, len(path)):
                assert path[:cut] in stored
            # time-stamp law: max(creation batch, last nonzero push)
            assert node.timestamp == oracle.timestamps[path]
            # table length law
            assert node.table.buffered_batches == index - oracle.created[path] + 1
            # no-loss law: lifetime total is the exact sum of recorded counts
            assert node.table.total() == sum(f for _, f in oracle.pushed.get(path, []))


def tail_prune(entries, epsilon, window_sizes):
    """Reference pruning rule from the framework this build removes it from:
    scanning from the oldest entry toward the newest, keep dropping while
    every accumulated suffix stays under the epsilon-scaled window size.
    ``entries`` and ``window_sizes`` are newest-first and aligned."""
    cumulative_f = 0
    cumulative_w = 0
    drop_from = len(entries)
    for position in range(len(entries) - 1, -1, -1):
        cumulative_f += entries[position].frequency
        cumulative_w += window_sizes[position]
        if cumulative_f < epsilon * cumulative_w:
            drop_from = position
        else:
            break
    return entries[:drop_from]


def test_tail_pruning_reference_loses_temporal_totals():
    # Contrast check: the discarded pruning rule trades away exact lifetime
    # totals, which the default path keeps (no-loss law above).
    tree = PatternTree(flat_windows=True)
    inject_patterns(tree, 1, [["A"]], frequency=1)
    inject_patterns(tree, 2, [["B"]], frequency=9)
    inject_patterns(tree, 3, [["A"]], frequency=5)
    node = tree.find(("A",))
    assert node.table.entries == [Entry(1, 5), Entry(1, 0), Entry(1, 1)]
    pruned = tail_prune(node.table.entries, 0.15, [10, 10, 10])
    assert pruned == [Entry(1, 5)]  # the two oldest windows are gone
    assert sum(e.frequency for e in pruned) < node.table.total()
