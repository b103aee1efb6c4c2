"""SlowFast aggregation of per-frame visual features into LLM-ready video tokens."""

__version__ = "0.1.0"

from .aggregator import (
    AggregatedTokens,
    PathwayConfig,
    aggregate,
    fast_pathway,
    slow_pathway,
    token_count,
)
from .budget import BudgetReport, SweepSpec, plan, sweep
from .encoder import EncoderSpec, encode_frames, load_features
from .errors import SftokError
from .feature_grid import FeatureGrid, TokenSequence, checksum, new_grid, read_vfgf, write_vfgf
from .pooling import adaptive_avg_pool, avg_pool_stride, flatten
from .prompting import PromptBundle, build_prompt, parse_choice
from .sampler import VideoFrames, sample_frames, temporal_subsample, uniform_indices

__all__ = [
    "AggregatedTokens",
    "BudgetReport",
    "EncoderSpec",
    "FeatureGrid",
    "PathwayConfig",
    "PromptBundle",
    "SftokError",
    "SweepSpec",
    "TokenSequence",
    "VideoFrames",
    "adaptive_avg_pool",
    "aggregate",
    "avg_pool_stride",
    "build_prompt",
    "checksum",
    "encode_frames",
    "fast_pathway",
    "flatten",
    "load_features",
    "new_grid",
    "parse_choice",
    "plan",
    "read_vfgf",
    "sample_frames",
    "slow_pathway",
    "sweep",
    "temporal_subsample",
    "token_count",
    "uniform_indices",
    "write_vfgf",
]
