"""Slow and Fast pathways and their concatenation into one token sequence.

Slow: uniformly keep ``n_slow`` of the ``n_frames`` frames, then mean-pool
each with stride ``slow_stride_h x slow_stride_w``.
Fast: keep every frame and adaptively mean-pool it to
``fast_out_h x fast_out_w``.
The final sequence is ``flatten(slow) + flatten(fast)`` with no separator.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import FrameCountMismatch, InvalidConfig
from .feature_grid import FeatureGrid, TokenSequence
from .pooling import adaptive_avg_pool, avg_pool_stride, check_stride, check_target, flatten
from .sampler import temporal_subsample


def parse_hw(text: str) -> tuple[int, int]:
    """Parse ``"2x1"`` (or ``"2X1"``, ``"2*1"``) into ``(2, 1)``."""
    for sep in ("x", "X", "*", ","):
        if sep in text:
            a, _, b = text.partition(sep)
            break
    else:
        raise InvalidConfig(f"expected HxW, got {text!r}")
    try:
        return int(a), int(b)
    except ValueError:
        raise InvalidConfig(f"expected HxW, got {text!r}") from None


@dataclass(frozen=True)
class PathwayConfig:
    n_frames: int = 50
    n_slow: int = 10
    slow_stride_h: int = 2
    slow_stride_w: int = 1
    fast_out_h: int = 4
    fast_out_w: int = 4

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidConfig(f"{f.name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidConfig(f"{f.name} must be >= 1, got {value}")
        if self.n_slow > self.n_frames:
            raise InvalidConfig(
                f"n_slow ({self.n_slow}) must not exceed n_frames ({self.n_frames})"
            )

    @property
    def slow_stride(self) -> tuple[int, int]:
        return self.slow_stride_h, self.slow_stride_w

    @property
    def fast_out(self) -> tuple[int, int]:
        return self.fast_out_h, self.fast_out_w

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> PathwayConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown pathway keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> PathwayConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"bad JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("pathway config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> PathwayConfig:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def describe(self, grid_h: int = 24, grid_w: int = 24) -> str:
        """Shape string such as ``10x12x24+50x4x4``."""
        return (
            f"{self.n_slow}x{grid_h // self.slow_stride_h}x{grid_w // self.slow_stride_w}"
            f"+{self.n_frames}x{self.fast_out_h}x{self.fast_out_w}"
        )


@dataclass(frozen=True, eq=False)
class AggregatedTokens:
    tokens: TokenSequence
    slow_span: range
    fast_span: range

    def __post_init__(self):
        if self.slow_span.start != 0 or self.fast_span.start != self.slow_span.stop:
            raise ValueError("spans must be contiguous, slow first")
        if self.fast_span.stop != len(self.tokens):
            raise ValueError("spans must cover the token sequence")

    @property
    def total(self) -> int:
        return len(self.slow_span) + len(self.fast_span)

    @property
    def slow_tokens(self) -> np.ndarray:
        return self.tokens.tokens[self.slow_span.start : self.slow_span.stop]

    @property
    def fast_tokens(self) -> np.ndarray:
        return self.tokens.tokens[self.fast_span.start : self.fast_span.stop]

    def as_grid(self) -> FeatureGrid:
        """The tokens as a ``(1, 1, total, C)`` grid, for VFGF output."""
        return FeatureGrid.from_array(self.tokens.tokens[None, None])

    def sidecar(self) -> dict:
        return {
            "total": self.total,
            "slow_span": [self.slow_span.start, self.slow_span.stop],
            "fast_span": [self.fast_span.start, self.fast_span.stop],
        }


def _check_frames(f_v: FeatureGrid, cfg: PathwayConfig) -> None:
    if f_v.n_frames != cfg.n_frames:
        raise FrameCountMismatch(
            f"features have {f_v.n_frames} frames, config expects {cfg.n_frames}"
        )


def slow_pathway(f_v: FeatureGrid, cfg: PathwayConfig) -> FeatureGrid:
    _check_frames(f_v, cfg)
    check_stride(f_v.height, f_v.width, cfg.slow_stride_h, cfg.slow_stride_w)
    # subsample first so only n_slow frames get pooled
    kept = temporal_subsample(f_v, cfg.n_slow)
    return avg_pool_stride(kept, cfg.slow_stride_h, cfg.slow_stride_w)


def fast_pathway(f_v: FeatureGrid, cfg: PathwayConfig) -> FeatureGrid:
    _check_frames(f_v, cfg)
    return adaptive_avg_pool(f_v, cfg.fast_out_h, cfg.fast_out_w)


def aggregate(f_v: FeatureGrid, cfg: PathwayConfig) -> AggregatedTokens:
    # validate both pathways before doing any work
    token_count(cfg, f_v.height, f_v.width)
    slow = flatten(slow_pathway(f_v, cfg))
    fast = flatten(fast_pathway(f_v, cfg))
    tokens = TokenSequence(np.concatenate([slow.tokens, fast.tokens], axis=0))
    n_slow = len(slow)
    return AggregatedTokens(
        tokens=tokens,
        slow_span=range(0, n_slow),
        fast_span=range(n_slow, n_slow + len(fast)),
    )


def slow_token_count(cfg: PathwayConfig, grid_h: int, grid_w: int) -> int:
    check_stride(grid_h, grid_w, cfg.slow_stride_h, cfg.slow_stride_w)
    return cfg.n_slow * (grid_h // cfg.slow_stride_h) * (grid_w // cfg.slow_stride_w)


def fast_token_count(cfg: PathwayConfig, grid_h: int, grid_w: int) -> int:
    check_target(grid_h, grid_w, cfg.fast_out_h, cfg.fast_out_w)
    return cfg.n_frames * cfg.fast_out_h * cfg.fast_out_w


def token_count(cfg: PathwayConfig, grid_h: int = 24, grid_w: int = 24) -> int:
    """Visual tokens produced by ``aggregate`` on an ``grid_h x grid_w`` grid."""
    return slow_token_count(cfg, grid_h, grid_w) + fast_token_count(cfg, grid_h, grid_w)
