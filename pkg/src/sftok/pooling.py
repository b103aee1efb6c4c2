"""Spatial average pooling over feature grids, and flattening to tokens.

Block sums are accumulated in float64 and stored back as float32.
"""

from __future__ import annotations

import numpy as np

from .errors import NonDivisibleStride, TargetExceedsInput, ZeroCount
from .feature_grid import FeatureGrid, TokenSequence


def _wrap(arr: np.ndarray) -> FeatureGrid:
    out = arr.astype(np.float32)
    out.flags.writeable = False
    return FeatureGrid(out)


def check_stride(height: int, width: int, stride_h: int, stride_w: int) -> None:
    if stride_h < 1 or stride_w < 1:
        raise ZeroCount(f"strides must be >= 1, got {stride_h}x{stride_w}")
    if height % stride_h:
        raise NonDivisibleStride("height", height, stride_h)
    if width % stride_w:
        raise NonDivisibleStride("width", width, stride_w)


def check_target(height: int, width: int, out_h: int, out_w: int) -> None:
    if out_h < 1 or out_w < 1:
        raise ZeroCount(f"target grid must be >= 1x1, got {out_h}x{out_w}")
    if out_h > height or out_w > width:
        raise TargetExceedsInput(f"target {out_h}x{out_w} exceeds input {height}x{width}")


def avg_pool_stride(grid: FeatureGrid, stride_h: int, stride_w: int) -> FeatureGrid:
    """Mean over non-overlapping ``stride_h x stride_w`` blocks, per frame and channel."""
    n, h, w, c = grid.shape
    check_stride(h, w, stride_h, stride_w)
    if stride_h == 1 and stride_w == 1:
        return grid
    blocks = grid.data.reshape(n, h // stride_h, stride_h, w // stride_w, stride_w, c)
    return _wrap(blocks.mean(axis=(2, 4), dtype=np.float64))


def adaptive_bounds(size: int, out: int) -> list[tuple[int, int]]:
    """``[floor(i*size/out), ceil((i+1)*size/out))`` for each output index."""
    return [((i * size) // out, -((-(i + 1) * size) // out)) for i in range(out)]


def adaptive_avg_pool(grid: FeatureGrid, out_h: int, out_w: int) -> FeatureGrid:
    """Mean-pool each frame down to an ``out_h x out_w`` grid.

    Windows follow the floor/ceil partition, so they may overlap by one cell
    when the sizes do not divide.
    """
    n, h, w, c = grid.shape
    check_target(h, w, out_h, out_w)
    if (out_h, out_w) == (h, w):
        return grid
    src = grid.data
    out = np.empty((n, out_h, out_w, c), dtype=np.float64)
    rows = adaptive_bounds(h, out_h)
    cols = adaptive_bounds(w, out_w)
    for i, (r0, r1) in enumerate(rows):
        for j, (c0, c1) in enumerate(cols):
            out[:, i, j, :] = src[:, r0:r1, c0:c1, :].mean(axis=(1, 2), dtype=np.float64)
    return _wrap(out)


def flatten(grid: FeatureGrid) -> TokenSequence:
    """Tokens ordered by frame, then row, then column."""
    n, h, w, c = grid.shape
    return TokenSequence(grid.data.reshape(n * h * w, c))
