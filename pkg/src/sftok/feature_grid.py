"""Per-frame visual feature grids and the VFGF binary format.

A grid is a dense ``(n_frames, height, width, channels)`` float32 tensor.  The
VFGF file is a fixed little-endian header followed by the raw payload::

    b"VFGF0001" | u32 version=1 | u32 n | u32 h | u32 w | u32 c | n*h*w*c f32

There is no padding and no trailer.
"""

from __future__ import annotations

import hashlib
import io
import struct
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    IoFailure,
    NonFiniteValue,
    TruncatedPayload,
    UnsupportedVersion,
)

MAGIC = b"VFGF0001"
VERSION = 1
_HEADER = struct.Struct("<5I")  # version, n, h, w, c
_FLOAT = np.dtype("<f4")


@dataclass(frozen=True, eq=False)
class FeatureGrid:
    """Immutable ``(n_frames, height, width, channels)`` float32 tensor.

    Build one with :func:`new_grid` or :meth:`from_array`; both validate.
    """

    data: np.ndarray

    @classmethod
    def from_array(cls, array) -> FeatureGrid:
        arr = np.asarray(array)
        if arr.ndim != 4:
            raise DimensionMismatch(f"expected a 4-D array, got shape {arr.shape}")
        return new_grid(*arr.shape, arr.reshape(-1))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureGrid):
            return NotImplemented
        return self.shape == other.shape and self.data.tobytes() == other.data.tobytes()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        n, h, w, c = self.shape
        return f"FeatureGrid({n}x{h}x{w}x{c})"


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """Ordered visual tokens, one row of ``channels`` floats per token."""

    tokens: np.ndarray

    @property
    def channels(self) -> int:
        return self.tokens.shape[1]

    def __len__(self) -> int:
        return self.tokens.shape[0]

    def __getitem__(self, index):
        return self.tokens[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TokenSequence):
            return NotImplemented
        return (
            self.tokens.shape == other.tokens.shape
            and self.tokens.tobytes() == other.tokens.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


def new_grid(
    n_frames: int, height: int, width: int, channels: int, data: Sequence[float] | np.ndarray
) -> FeatureGrid:
    """Validate dimensions and values and wrap ``data`` as a grid.

    ``data`` is flat (or any shape with the right element count) in
    frame-major, row-major, channel-last order.
    """
    dims = (n_frames, height, width, channels)
    if any(int(d) != d or d < 1 for d in dims):
        raise DimensionMismatch(f"all dimensions must be integers >= 1, got {dims}")
    dims = tuple(int(d) for d in dims)
    flat = np.asarray(data, dtype=np.float64 if not isinstance(data, np.ndarray) else None)
    flat = flat.reshape(-1)
    expected = dims[0] * dims[1] * dims[2] * dims[3]
    if flat.size != expected:
        raise DimensionMismatch(
            f"data length {flat.size} does not match {'x'.join(map(str, dims))} = {expected}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        arr = flat.astype(np.float32)
    finite = np.isfinite(arr)
    if not finite.all():
        # the original value may have overflowed during the float32 cast
        idx = int(np.argmin(finite))
        raise NonFiniteValue(idx, float(flat[idx]))
    arr = arr.reshape(dims)
    arr.flags.writeable = False
    return FeatureGrid(arr)


def to_bytes(grid: FeatureGrid) -> bytes:
    """Canonical VFGF encoding of ``grid``."""
    header = MAGIC + _HEADER.pack(VERSION, *grid.shape)
    return header + grid.data.astype(_FLOAT, copy=False).tobytes(order="C")


def write_vfgf(grid: FeatureGrid, sink: BinaryIO) -> int:
    """Write ``grid`` to a binary stream; returns the number of bytes written."""
    payload = to_bytes(grid)
    try:
        sink.write(payload)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return len(payload)


def _read_exact(source: BinaryIO, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        try:
            chunk = source.read(remaining)
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_vfgf(source: BinaryIO) -> FeatureGrid:
    """Read one grid from a binary stream positioned at a VFGF header."""
    magic = _read_exact(source, len(MAGIC))
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {magic!r}")
    header = _read_exact(source, _HEADER.size)
    if len(header) != _HEADER.size:
        raise TruncatedPayload(f"header ends after {len(header)} of {_HEADER.size} bytes")
    version, n, h, w, c = _HEADER.unpack(header)
    if version != VERSION:
        raise UnsupportedVersion(f"VFGF version {version} (supported: {VERSION})")
    if min(n, h, w, c) < 1:
        raise DimensionMismatch(f"header dimensions must be >= 1, got {(n, h, w, c)}")
    nbytes = n * h * w * c * _FLOAT.itemsize
    payload = _read_exact(source, nbytes)
    if len(payload) != nbytes:
        raise TruncatedPayload(f"payload has {len(payload)} of {nbytes} bytes")
    return new_grid(n, h, w, c, np.frombuffer(payload, dtype=_FLOAT))


def from_bytes(data: bytes) -> FeatureGrid:
    return read_vfgf(io.BytesIO(data))


def save(grid: FeatureGrid, path) -> int:
    try:
        with open(path, "wb") as fh:
            return write_vfgf(grid, fh)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def load(path) -> FeatureGrid:
    try:
        with open(path, "rb") as fh:
            return read_vfgf(fh)
    except FileNotFoundError as exc:
        raise IoFailure(f"{path}: no such file") from exc
    except IsADirectoryError as exc:
        raise IoFailure(f"{path}: is a directory") from exc


def checksum(grid: FeatureGrid) -> str:
    """SHA-256 hex digest of the canonical VFGF encoding."""
    return hashlib.sha256(to_bytes(grid)).hexdigest()
