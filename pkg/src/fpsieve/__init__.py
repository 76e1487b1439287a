"""Frequent pattern mining with an iterative sieve over flat integer arrays."""
from .core import (
    EncodingError,
    LevelContext,
    MiningConfig,
    Pattern,
    ScratchBuffers,
    VerticalDatabase,
    build_vertical,
    compute_rate,
    delta_decode,
    delta_encode,
    root_context,
)
from .filters import FilterDecision, expand_grouped, independence_check, same_frequency_group
from .miner import (
    LevelCursor,
    MiningStats,
    PatternCollector,
    PatternCounter,
    PatternWriter,
    build_conditional,
    emit_patterns_at_level,
    mine,
    mine_patterns,
)

__version__ = "0.1.0"
