"""Command-line interface: ``sftok {encode,aggregate,plan,sweep,prompt}``.

All commands are deterministic.  Library errors are reported on stderr as
``sftok: error: <ErrorName>: <detail>`` with exit status 2.

The ``SFTOK_SEED`` environment variable is accepted and ignored; nothing in
the pipeline is random.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .aggregator import PathwayConfig, aggregate, parse_hw
from .budget import (
    CONTEXT_PRESETS,
    DEFAULT_CONTEXT_LIMIT,
    DEFAULT_RESERVED_TEXT,
    MODES,
    SweepSpec,
    plan,
    rows_to_csv,
    sweep,
    visual_tokens,
)
from .encoder import EncoderSpec, encode_frames
from .errors import InvalidConfig, SftokError
from .feature_grid import MAGIC, checksum, load, save
from .prompting import TASK_KINDS, PromptBundle, build_prompt
from .sampler import sample_frames

EXIT_ERROR = 2


def _hw(text: str) -> tuple[int, int]:
    try:
        return parse_hw(text)
    except InvalidConfig as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _context_limit(text: str) -> int:
    if text in CONTEXT_PRESETS:
        return CONTEXT_PRESETS[text]
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an integer or one of {sorted(CONTEXT_PRESETS)}"
        ) from None


def read_config(path) -> dict:
    """Load a JSON config file.

    Sections ``pathway``, ``encoder``, ``prompt`` and ``sweep`` are optional;
    pathway keys may also sit at the top level.
    """
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfig(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: bad JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: config must be a JSON object")
    return data


def _pathway_section(config: dict) -> dict:
    if "pathway" in config:
        return dict(config["pathway"])
    keys = set(PathwayConfig.__dataclass_fields__)
    return {k: v for k, v in config.items() if k in keys}


def pathway_from_args(args, config: dict) -> PathwayConfig:
    values = _pathway_section(config)
    if args.n_frames is not None:
        values["n_frames"] = args.n_frames
    if args.n_slow is not None:
        values["n_slow"] = args.n_slow
    if args.slow_stride is not None:
        values["slow_stride_h"], values["slow_stride_w"] = args.slow_stride
    if args.fast_out is not None:
        values["fast_out_h"], values["fast_out_w"] = args.fast_out
    return PathwayConfig.from_dict(values)


def _add_pathway_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pathway")
    g.add_argument("--n-frames", type=int, help="key frames N (default 50)")
    g.add_argument("--n-slow", type=int, help="Slow pathway frames (default 10)")
    g.add_argument("--slow-stride", type=_hw, metavar="HxW", help="Slow pooling stride (default 2x1)")
    g.add_argument("--fast-out", type=_hw, metavar="HxW", help="Fast target grid (default 4x4)")


def _add_grid_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--grid", type=_hw, default=(24, 24), metavar="HxW", help="encoder token grid (default 24x24)"
    )


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--context-limit",
        type=_context_limit,
        default=DEFAULT_CONTEXT_LIMIT,
        help=f"LLM context length or preset {sorted(CONTEXT_PRESETS)} (default {DEFAULT_CONTEXT_LIMIT})",
    )
    p.add_argument(
        "--reserved-text",
        type=int,
        default=DEFAULT_RESERVED_TEXT,
        help=f"tokens kept for prompt and answer (default {DEFAULT_RESERVED_TEXT})",
    )


def _encoder_spec(args, config: dict) -> EncoderSpec:
    values = dict(config.get("encoder", {}))
    if args.grid is not None:
        values["grid_h"], values["grid_w"] = args.grid
    if getattr(args, "channels", None) is not None:
        values["channels"] = args.channels
    return EncoderSpec.from_dict(values)


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_encode(args) -> int:
    config = read_config(args.config)
    spec = _encoder_spec(args, config)
    n = args.n_frames
    if n is None:
        n = _pathway_section(config).get("n_frames", PathwayConfig().n_frames)
    frames = sample_frames(args.video, n)
    grid = encode_frames(frames, spec)
    save(grid, args.out)
    print(f"{checksum(grid)}  {args.out}")
    return 0


def _is_vfgf(path: Path) -> bool:
    if not path.is_file():
        return False
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def cmd_aggregate(args) -> int:
    config = read_config(args.config)
    cfg = pathway_from_args(args, config)
    source = Path(args.input)
    if _is_vfgf(source):
        f_v = load(source)
    else:
        spec = _encoder_spec(args, config)
        f_v = encode_frames(sample_frames(source, cfg.n_frames), spec)
    result = aggregate(f_v, cfg)
    if args.out is not None:
        save(result.as_grid(), args.out)
        sidecar = dict(result.sidecar(), config=cfg.to_dict())
        Path(str(args.out) + ".json").write_text(
            json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
        )
    print(result.total)
    return 0


def cmd_plan(args) -> int:
    config = read_config(args.config)
    cfg = pathway_from_args(args, config)
    grid_h, grid_w = args.grid
    report = plan(cfg, grid_h, grid_w, args.context_limit, args.reserved_text, args.mode)
    print(json.dumps(report.to_dict()))
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.spec)
    grid_h, grid_w = args.grid
    rows = sweep(spec, grid_h, grid_w, args.context_limit, args.reserved_text)
    _write_text(rows_to_csv(rows), args.out)
    return 0


def cmd_prompt(args) -> int:
    config = read_config(args.config)
    values = dict(config.get("prompt", {}))
    if not values and "question" in config:
        values = {k: v for k, v in config.items() if k in PromptBundle.__dataclass_fields__}
    if args.question is not None:
        values["question"] = args.question
    if args.task is not None:
        values["task_kind"] = args.task
    if args.option:
        values["options"] = args.option
    for name in ("task_instruction", "input_data", "structured_answer"):
        flag = getattr(args, name)
        if flag is not None:
            values[f"include_{name}"] = flag
    bundle = PromptBundle.from_dict(values)
    assembled = build_prompt(bundle)
    cfg = pathway_from_args(args, config)
    n_tokens = visual_tokens(cfg, *args.grid)
    _write_text(assembled.render(n_tokens), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sftok", description="SlowFast video token aggregation and budgeting."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="sample key frames and encode them to a VFGF file")
    p.add_argument("video", help="directory of numbered frames, image, or video file")
    p.add_argument("--out", required=True, help="output VFGF path")
    p.add_argument("--n-frames", type=int, help="key frames to sample (default 50)")
    p.add_argument("--grid", type=_hw, default=None, metavar="HxW", help="token grid (default 24x24)")
    p.add_argument("--channels", type=int, help="toy encoder channels (default 3)")
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("aggregate", help="run the Slow and Fast pathways")
    p.add_argument("input", help="VFGF feature file, or a video accepted by `encode`")
    p.add_argument("--out", help="write tokens as (1,1,total,C) VFGF plus <out>.json")
    p.add_argument("--grid", type=_hw, default=None, metavar="HxW", help="toy encoder grid for video input")
    p.add_argument("--channels", type=int, help="toy encoder channels for video input")
    p.add_argument("--config", help="JSON config file")
    _add_pathway_flags(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("plan", help="check a configuration against the context window")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--mode", choices=MODES, default="slowfast")
    _add_grid_flag(p)
    _add_budget_flags(p)
    _add_pathway_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="token counts over a grid of configurations, as CSV")
    p.add_argument("spec", help="JSON sweep spec (top level or under a 'sweep' key)")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_grid_flag(p)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("prompt", help="assemble the prompt around the visual tokens")
    p.add_argument("--config", help="JSON config with a 'prompt' section or bundle keys")
    p.add_argument("--question")
    p.add_argument("--task", choices=TASK_KINDS)
    p.add_argument("--option", action="append", help="answer option (repeat per option)")
    for name in ("task-instruction", "input-data", "structured-answer"):
        p.add_argument(f"--{name}", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", help="output text path (default stdout)")
    _add_grid_flag(p)
    _add_pathway_flags(p)
    p.set_defaults(func=cmd_prompt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SftokError as exc:
        print(f"sftok: error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"sftok: error: IoFailure: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
