"""Uniform key-frame selection.

Index ``i`` of ``k`` picks ``floor((2i + 1) * total / (2k))``: the midpoint of
the i-th of ``k`` equal segments.  ``k == total`` gives the identity, ``k == 1``
gives the middle frame, and ``k > total`` repeats frames instead of padding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DecodeFailure, EmptyVideo, ZeroCount
from .feature_grid import FeatureGrid

FRAME_SIZE = 336
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass
class VideoFrames:
    """Sampled RGB frames, each ``(height_px, width_px, 3)`` uint8."""

    frames: list[np.ndarray]
    source_frame_count: int
    sampled_indices: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.frames:
            shape = self.frames[0].shape
            for i, f in enumerate(self.frames):
                if f.shape != shape:
                    raise DecodeFailure(f"frame {i} has shape {f.shape}, expected {shape}")

    def __len__(self) -> int:
        return len(self.frames)

    def as_array(self) -> np.ndarray:
        return np.stack(self.frames)


def uniform_indices(total: int, k: int) -> list[int]:
    if total < 1 or k < 1:
        raise ZeroCount(f"total and k must be >= 1, got total={total}, k={k}")
    return [((2 * i + 1) * total) // (2 * k) for i in range(k)]


def temporal_subsample(grid: FeatureGrid, k: int) -> FeatureGrid:
    """Keep ``k`` frames of ``grid`` at uniform indices."""
    idx = uniform_indices(grid.n_frames, k)
    if idx == list(range(grid.n_frames)):
        return grid
    return FeatureGrid.from_array(grid.data[idx])


def resize_frame(frame: np.ndarray, size: int = FRAME_SIZE) -> np.ndarray:
    """Bilinear resize to ``size x size``; frames already that size pass through."""
    if frame.shape[:2] == (size, size):
        return frame
    from PIL import Image

    img = Image.fromarray(frame)
    return np.asarray(img.resize((size, size), Image.BILINEAR), dtype=np.uint8)


def _to_rgb(frame) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise DecodeFailure(f"cannot interpret frame of shape {arr.shape} as RGB")
    if arr.dtype != np.uint8:
        raise DecodeFailure(f"frames must be 8-bit, got {arr.dtype}")
    return np.ascontiguousarray(arr[..., :3])


def _frame_number(path: Path) -> tuple:
    nums = re.findall(r"\d+", path.stem)
    return (int(nums[-1]) if nums else -1, path.name)


def list_frame_files(directory: Path) -> list[Path]:
    """Image files in ``directory``, ordered by the last number in each name."""
    files = [p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES]
    return sorted(files, key=_frame_number)


def _load_image(path: Path) -> np.ndarray:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise DecodeFailure(f"{path}: {exc}") from exc


def _sample_loader(
    total: int, n: int, load: Callable[[int], np.ndarray], size: int
) -> VideoFrames:
    if total < 1:
        raise EmptyVideo("video has no frames")
    idx = uniform_indices(total, n)
    cache: dict[int, np.ndarray] = {}
    frames = []
    for i in idx:
        if i not in cache:
            cache[i] = resize_frame(_to_rgb(load(i)), size)
        frames.append(cache[i])
    return VideoFrames(frames=frames, source_frame_count=total, sampled_indices=idx)


def _read_video_file(path: Path) -> list[np.ndarray]:
    try:
        import cv2
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise DecodeFailure(
            "reading video files needs opencv; install with `pip install sftok[video]`"
        ) from exc
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise DecodeFailure(f"{path}: cannot open video")
    frames = []
    try:
        while True:
            ok, bgr = cap.read()
            if not ok:
                break
            frames.append(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))
    finally:
        cap.release()
    return frames


def sample_frames(video, n: int, size: int = FRAME_SIZE) -> VideoFrames:
    """Sample ``n`` key frames uniformly from ``video`` and resize them.

    ``video`` may be a directory of numbered PNG/JPEG files, a video file
    (decoded with OpenCV), or an in-memory sequence of RGB uint8 arrays.
    Only the selected frames of an image directory are decoded.
    """
    if n < 1:
        raise ZeroCount(f"n must be >= 1, got {n}")
    if isinstance(video, (str, Path)):
        path = Path(video)
        if not path.exists():
            raise EmptyVideo(f"{path}: no such file or directory")
        if path.is_dir():
            files = list_frame_files(path)
            if not files:
                raise EmptyVideo(f"{path}: no image frames found")
            return _sample_loader(len(files), n, lambda i: _load_image(files[i]), size)
        if path.suffix.lower() in IMAGE_SUFFIXES:
            return _sample_loader(1, n, lambda i: _load_image(path), size)
        decoded = _read_video_file(path)
        if not decoded:
            raise EmptyVideo(f"{path}: no decodable frames")
        return _sample_loader(len(decoded), n, decoded.__getitem__, size)
    frames: Sequence = video
    if len(frames) == 0:
        raise EmptyVideo("video has no frames")
    return _sample_loader(len(frames), n, frames.__getitem__, size)
