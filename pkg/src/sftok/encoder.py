"""Visual encoders: frames in, ``(N, grid_h, grid_w, channels)`` features out.

``toy_patch_mean`` is a deterministic stand-in for a CLIP-style encoder plus
projector.  It cuts each 336x336 frame into ``grid_h x grid_w`` patches and
sets token channel ``c`` to the mean of pixel channel ``c % 3`` over the
patch, scaled to [0, 1].  ``file_backed`` loads precomputed features (for
example real projector outputs) from a VFGF file.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import BadFrameSize, FrameCountMismatch, InvalidConfig, NonDivisiblePatch
from .feature_grid import FeatureGrid, load
from .sampler import FRAME_SIZE, VideoFrames

TOY = "toy_patch_mean"
FILE_BACKED = "file_backed"
ENCODER_KINDS = (TOY, FILE_BACKED)


@dataclass(frozen=True)
class EncoderSpec:
    kind: str = TOY
    grid_h: int = 24
    grid_w: int = 24
    channels: int = 3
    source_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise InvalidConfig(f"unknown encoder kind {self.kind!r}; expected {ENCODER_KINDS}")
        if min(self.grid_h, self.grid_w, self.channels) < 1:
            raise InvalidConfig("grid_h, grid_w and channels must be >= 1")
        if self.kind == TOY and (FRAME_SIZE % self.grid_h or FRAME_SIZE % self.grid_w):
            raise NonDivisiblePatch(
                f"{FRAME_SIZE} is not divisible by grid {self.grid_h}x{self.grid_w}"
            )
        if self.kind == FILE_BACKED and not self.source_path:
            raise InvalidConfig("file_backed encoder needs source_path")

    @property
    def patch_size(self) -> tuple[int, int]:
        return FRAME_SIZE // self.grid_h, FRAME_SIZE // self.grid_w

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> EncoderSpec:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfig(f"unknown encoder keys: {sorted(unknown)}")
        return cls(**data)


def patch_means(pixels: np.ndarray, grid_h: int, grid_w: int) -> np.ndarray:
    """Per-patch RGB means in [0, 1] for ``(N, H, W, 3)`` uint8 frames."""
    n, h, w, _ = pixels.shape
    ph, pw = h // grid_h, w // grid_w
    blocks = pixels.reshape(n, grid_h, ph, grid_w, pw, 3)
    # integer sums are exact, so the result does not depend on summation order
    sums = blocks.sum(axis=(2, 4), dtype=np.int64)
    return sums / (ph * pw * 255.0)


def encode_frames(frames: VideoFrames, spec: Optional[EncoderSpec] = None) -> FeatureGrid:
    spec = spec or EncoderSpec()
    n = len(frames)
    if spec.kind == FILE_BACKED:
        return load_features(spec.source_path, n)
    if n == 0:
        raise BadFrameSize("no frames to encode")
    pixels = frames.as_array()
    if pixels.shape[1:] != (FRAME_SIZE, FRAME_SIZE, 3) or pixels.dtype != np.uint8:
        raise BadFrameSize(
            f"expected {FRAME_SIZE}x{FRAME_SIZE}x3 uint8 frames, got {pixels.shape[1:]} "
            f"{pixels.dtype}"
        )
    rgb = patch_means(pixels, spec.grid_h, spec.grid_w)
    tokens = rgb[..., np.arange(spec.channels) % 3]
    return FeatureGrid.from_array(tokens)


def load_features(path, expected_n: int) -> FeatureGrid:
    grid = load(path)
    if grid.n_frames != expected_n:
        raise FrameCountMismatch(f"{path}: has {grid.n_frames} frames, expected {expected_n}")
    return grid
