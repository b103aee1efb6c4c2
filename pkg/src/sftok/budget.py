"""Context-window accounting and ablation sweeps over pathway configurations.

Only token feasibility is modelled. GPU memory is not.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .aggregator import PathwayConfig, fast_token_count, parse_hw, slow_token_count
from .errors import InvalidConfig, InvalidSpec

DEFAULT_CONTEXT_LIMIT = 8192
VICUNA_CONTEXT_LIMIT = 4096
CONTEXT_PRESETS = {"rope2x": DEFAULT_CONTEXT_LIMIT, "vicuna": VICUNA_CONTEXT_LIMIT}
DEFAULT_RESERVED_TEXT = 512

MODES = ("slowfast", "slow_only", "fast_only")
CSV_HEADER = ["mode", "n_frames", "n_slow", "out_h", "out_w", "visual_tokens", "fits"]


@dataclass(frozen=True)
class BudgetReport:
    visual_tokens: int
    reserved_text_tokens: int
    context_limit: int

    @property
    def margin(self) -> int:
        return self.context_limit - self.visual_tokens - self.reserved_text_tokens

    @property
    def fits(self) -> bool:
        return self.margin >= 0

    def to_dict(self) -> dict:
        return {
            "visual_tokens": self.visual_tokens,
            "reserved_text_tokens": self.reserved_text_tokens,
            "context_limit": self.context_limit,
            "margin": self.margin,
            "fits": self.fits,
        }


def visual_tokens(
    cfg: PathwayConfig, grid_h: int = 24, grid_w: int = 24, mode: str = "slowfast"
) -> int:
    """Token count for ``cfg`` with one pathway optionally removed."""
    if mode == "slowfast":
        return slow_token_count(cfg, grid_h, grid_w) + fast_token_count(cfg, grid_h, grid_w)
    if mode == "slow_only":
        return slow_token_count(cfg, grid_h, grid_w)
    if mode == "fast_only":
        return fast_token_count(cfg, grid_h, grid_w)
    raise InvalidConfig(f"unknown mode {mode!r}; expected one of {MODES}")


def plan(
    cfg: PathwayConfig,
    grid_h: int = 24,
    grid_w: int = 24,
    context_limit: int = DEFAULT_CONTEXT_LIMIT,
    reserved_text_tokens: int = DEFAULT_RESERVED_TEXT,
    mode: str = "slowfast",
) -> BudgetReport:
    """Check ``cfg`` against a context window.

    Going over budget is reported through ``fits``, never raised.
    """
    if context_limit < 1:
        raise InvalidConfig(f"context_limit must be >= 1, got {context_limit}")
    if reserved_text_tokens < 0:
        raise InvalidConfig(f"reserved_text_tokens must be >= 0, got {reserved_text_tokens}")
    return BudgetReport(
        visual_tokens=visual_tokens(cfg, grid_h, grid_w, mode),
        reserved_text_tokens=reserved_text_tokens,
        context_limit=context_limit,
    )


_DEFAULT = PathwayConfig()


@dataclass
class SweepSpec:
    """Axes to cross. Axes a mode does not use must stay single-valued.

    ``slowfast`` crosses all four axes, ``slow_only`` crosses n_frames, n_slow
    and slow_strides, ``fast_only`` crosses n_frames and fast_outs.
    """

    mode: str = "slowfast"
    n_frames: list[int] = field(default_factory=lambda: [_DEFAULT.n_frames])
    n_slow: list[int] = field(default_factory=lambda: [_DEFAULT.n_slow])
    slow_strides: list[tuple[int, int]] = field(default_factory=lambda: [_DEFAULT.slow_stride])
    fast_outs: list[tuple[int, int]] = field(default_factory=lambda: [_DEFAULT.fast_out])

    _AXES = ("n_frames", "n_slow", "slow_strides", "fast_outs")
    _USED = {
        "slowfast": _AXES,
        "slow_only": ("n_frames", "n_slow", "slow_strides"),
        "fast_only": ("n_frames", "fast_outs"),
    }

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidSpec(f"unknown mode {self.mode!r}; expected one of {MODES}")
        self.slow_strides = [tuple(s) for s in self.slow_strides]
        self.fast_outs = [tuple(s) for s in self.fast_outs]
        for name in self._AXES:
            values = getattr(self, name)
            if not values:
                raise InvalidSpec(f"axis {name} is empty")
            if name not in self._USED[self.mode] and len(values) > 1:
                raise InvalidSpec(f"mode {self.mode} does not use axis {name}")
        for s in self.slow_strides + self.fast_outs:
            if len(s) != 2:
                raise InvalidSpec(f"expected (h, w) pairs, got {s!r}")

    def axis_lengths(self) -> list[int]:
        return [len(getattr(self, name)) for name in self._USED[self.mode]]

    def cells(self):
        """Pathway configs in lexicographic axis order."""
        for n, ns, (sh, sw), (fh, fw) in itertools.product(
            self.n_frames, self.n_slow, self.slow_strides, self.fast_outs
        ):
            try:
                yield PathwayConfig(n, ns, sh, sw, fh, fw)
            except InvalidConfig as exc:
                raise InvalidSpec(f"sweep cell is invalid: {exc}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slow_strides"] = [f"{h}x{w}" for h, w in self.slow_strides]
        d["fast_outs"] = [f"{h}x{w}" for h, w in self.fast_outs]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> SweepSpec:
        if not isinstance(data, dict):
            raise InvalidSpec("sweep spec must be a JSON object")
        unknown = set(data) - {"mode", *cls._AXES}
        if unknown:
            raise InvalidSpec(f"unknown sweep keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("slow_strides", "fast_outs"):
            if key in kwargs:
                kwargs[key] = [_pair(v) for v in _as_list(kwargs[key], key)]
        for key in ("n_frames", "n_slow"):
            if key in kwargs:
                kwargs[key] = [_count(v, key) for v in _as_list(kwargs[key], key)]
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> SweepSpec:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InvalidSpec(f"{path}: no such file") from None
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"{path}: bad JSON: {exc}") from exc
        if isinstance(data, dict) and "sweep" in data:
            data = data["sweep"]
        return cls.from_dict(data)


def _as_list(value, key):
    if not isinstance(value, list):
        raise InvalidSpec(f"{key} must be a list")
    return value


def _count(value, key) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidSpec(f"{key} values must be integers, got {value!r}")
    return value


def _pair(value) -> tuple[int, int]:
    if isinstance(value, str):
        try:
            return parse_hw(value)
        except InvalidConfig as exc:
            raise InvalidSpec(str(exc)) from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return _count(value[0], "pair"), _count(value[1], "pair")
    raise InvalidSpec(f"expected 'HxW' or [h, w], got {value!r}")


@dataclass(frozen=True)
class SweepRow:
    mode: str
    config: PathwayConfig
    visual_tokens: int
    fits: bool
    grid_h: int = 24
    grid_w: int = 24

    @property
    def n_slow(self) -> int:
        # a removed Slow pathway contributes zero frames
        return 0 if self.mode == "fast_only" else self.config.n_slow

    @property
    def out_hw(self) -> tuple[int, int]:
        """Per-frame output grid of the pathway this row varies."""
        if self.mode == "slow_only":
            return (
                self.grid_h // self.config.slow_stride_h,
                self.grid_w // self.config.slow_stride_w,
            )
        return self.config.fast_out

    @property
    def descriptor(self) -> str:
        c = self.config
        slow = f"{c.n_slow}x{self.grid_h // c.slow_stride_h}x{self.grid_w // c.slow_stride_w}"
        fast = f"{c.n_frames}x{c.fast_out_h}x{c.fast_out_w}"
        return {"slowfast": f"{slow}+{fast}", "slow_only": slow, "fast_only": fast}[self.mode]

    def csv_fields(self) -> list:
        out_h, out_w = self.out_hw
        return [
            self.mode,
            self.config.n_frames,
            self.n_slow,
            out_h,
            out_w,
            self.visual_tokens,
            "true" if self.fits else "false",
        ]


def sweep(
    spec: SweepSpec,
    grid_h: int = 24,
    grid_w: int = 24,
    context_limit: int = DEFAULT_CONTEXT_LIMIT,
    reserved_text_tokens: int = DEFAULT_RESERVED_TEXT,
) -> list[SweepRow]:
    rows = []
    for cfg in spec.cells():
        report = plan(cfg, grid_h, grid_w, context_limit, reserved_text_tokens, spec.mode)
        rows.append(
            SweepRow(spec.mode, cfg, report.visual_tokens, report.fits, grid_h, grid_w)
        )
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()
