import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiltstream.core import (
    Batch,
    Config,
    ConfigError,
    EmptyBatchError,
    OrderPolicy,
    build_item_order,
    is_normalized,
    normalize_transaction,
    validate_item,
)

GOLDEN_BATCH_1 = Batch(
    index=1,
    transactions=(("A", "C", "D"), ("E", "V"), ("A", "C", "J"), ("B", "F", "A")),
)

items = st.sampled_from(list("ABCDEFGHJV"))
raw_transactions = st.lists(items, min_size=0, max_size=8)


def first_batch_order():
    return build_item_order(GOLDEN_BATCH_1, OrderPolicy.FIRST_BATCH)


def test_first_batch_order_by_descending_frequency():
    # A occurs in 3 transactions, C in 2, the rest in 1 (lexicographic ties).
    order = first_batch_order()
    ranked = sorted(order.ranks, key=order.ranks.get)
    assert ranked == ["A", "C", "B", "D", "E", "F", "J", "V"]


def test_lexicographic_order_ignores_data():
    order = build_item_order(GOLDEN_BATCH_1, OrderPolicy.LEXICOGRAPHIC)
    assert order.key("A") < order.key("B") < order.key("C")


def test_unseen_items_rank_after_seen():
    batch = Batch(index=1, transactions=(("Z",),))
    order = build_item_order(batch, OrderPolicy.FIRST_BATCH)
    assert order.key("Z") < order.key("A")


def test_order_from_empty_batch_rejected():
    with pytest.raises(EmptyBatchError):
        build_item_order(Batch(index=1, transactions=()), OrderPolicy.FIRST_BATCH)


def test_normalize_sorts_by_order():
    assert normalize_transaction(["D", "A", "C"], first_batch_order()) == ("A", "C", "D")


def test_normalize_collapses_duplicates():
    assert normalize_transaction(["A", "A", "A"], first_batch_order()) == ("A",)


def test_normalize_empty():
    assert normalize_transaction([], first_batch_order()) == ()


@given(raw_transactions)
def test_normalize_idempotent(raw):
    order = first_batch_order()
    once = normalize_transaction(raw, order)
    assert normalize_transaction(once, order) == once
    assert is_normalized(once, order)


@given(raw_transactions, raw_transactions)
def test_same_item_set_same_normal_form(a, b):
    order = first_batch_order()
    if set(a) == set(b):
        assert normalize_transaction(a, order) == normalize_transaction(b, order)


@given(items, items)
def test_order_is_total(a, b):
    order = first_batch_order()
    if a != b:
        assert order.key(a) != order.key(b)


def test_validate_item_rejects_delimiter_and_empty():
    assert validate_item("A") == "A"
    with pytest.raises(ValueError):
        validate_item("x")
    with pytest.raises(ValueError):
        validate_item("")


def test_config_invariants():
    Config(sigma=0.5, epsilon=0.5)  # epsilon == sigma allowed
    with pytest.raises(ConfigError):
        Config(sigma=0.1, epsilon=0.2)
    with pytest.raises(ConfigError):
        Config(sigma=1.0, epsilon=0.5)
    with pytest.raises(ConfigError):
        Config(window_period_ms=0)
    with pytest.raises(ConfigError):
        Config(shake_interval_n=0)
    with pytest.raises(ConfigError):
        Config(fading_support=0)


def test_config_from_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# experiment defaults\n"
        "sigma=0.004\n"
        "epsilon = 0.001\n"
        "window_period_ms=5000\n"
        "shake_interval_n=10\n"
        "fading_support=2\n"
        "seed=7\n"
        "order_policy=lexicographic\n"
    )
    cfg = Config.from_file(path)
    assert cfg.sigma == 0.004
    assert cfg.epsilon == 0.001
    assert cfg.seed == 7
    assert cfg.order_policy is OrderPolicy.LEXICOGRAPHIC


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("support=0.1\n")
    with pytest.raises(ConfigError):
        Config.from_file(path)
