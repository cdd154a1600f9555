"""Streaming frequent-itemset mining with tilted-time frequency tables.

Batches collected from a windowed stream are mined with FP-growth; every
mined itemset accumulates in a persistent pattern tree whose nodes keep
per-batch frequency histories. A periodic shaking point drops subtrees
whose patterns have gone stale.
"""

from .core import (
    Batch,
    Config,
    ConfigError,
    EmptyBatchError,
    ItemOrder,
    OrderPolicy,
    build_item_order,
    normalize_transaction,
)
from .fptree import FPTree, MinedPattern, fpgrowth_mine, mine_to_dict
from .fpstream import (
    PatternTree,
    UpdateReport,
    inject_patterns,
    report_frequent,
    stream_update,
    tree_size_bytes,
)
from .shaking import ShakeReport, shaking_point
from .stream import (
    BatchStats,
    FileSource,
    OffcLattice,
    PatternReplaySource,
    PipelineResult,
    SyntheticSource,
    next_batch,
    run_pipeline,
)
from .tilted import TiltedTimeTable

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "BatchStats",
    "Config",
    "ConfigError",
    "EmptyBatchError",
    "FPTree",
    "FileSource",
    "ItemOrder",
    "MinedPattern",
    "OffcLattice",
    "OrderPolicy",
    "PatternReplaySource",
    "PatternTree",
    "PipelineResult",
    "ShakeReport",
    "SyntheticSource",
    "TiltedTimeTable",
    "UpdateReport",
    "build_item_order",
    "fpgrowth_mine",
    "inject_patterns",
    "mine_to_dict",
    "next_batch",
    "normalize_transaction",
    "report_frequent",
    "run_pipeline",
    "shaking_point",
    "stream_update",
    "tree_size_bytes",
]
