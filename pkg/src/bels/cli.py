"""Command-line front end: ``bels run|ablate|sweep|generate``.

Exit codes: 0 success, 1 runtime failure, 2 configuration failure.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .config import RunConfig, build_stream, load_config, parse_config
from .ensemble import VARIANTS, BelsConfig, BelsModel
from .errors import InvalidConfig
from .prequential import default_grid, evaluate, grid_select, head_size, write_series
from .snapshot import load_snapshot, save_snapshot
from .streams import write_csv

MANIFEST_SCHEMA = 1
SWEEP_PARAMS = ("chunk_size", "m_o", "m_p")


class Manifest:
    """``key: value`` lines written to ``manifest.txt``."""

    def __init__(self, command: str, cfg: RunConfig):
        self.lines = [
            ("schema_version", MANIFEST_SCHEMA),
            ("command", command),
            ("bels_version", __version__),
            ("python", platform.python_version()),
            ("numpy", np.__version__),
            ("scipy", scipy.__version__),
            ("seed", cfg.seed),
            ("config_file", cfg.source),
            ("config", json.dumps(cfg.echo(), sort_keys=True)),
        ]

    def add(self, key, value):
        self.lines.append((key, value))

    def write(self, out_dir: Path):
        with open(out_dir / "manifest.txt", "w", encoding="utf-8") as fh:
            for key, value in self.lines:
                fh.write(f"{key}: {value}\n")


def _say(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr, flush=True)


def _progress(args, every_samples=10_000):
    if args.quiet:
        return None
    start = time.perf_counter()
    mark = [0]

    def report(rec):
        if rec.samples_seen - mark[0] >= every_samples:
            mark[0] = rec.samples_seen
            rate = rec.samples_seen / max(time.perf_counter() - start, 1e-9)
            print(
                f"  {rec.samples_seen} samples  {rate:.0f} samples/sec  window accuracy {rec.window_accuracy:.4f}",
                file=sys.stderr,
                flush=True,
            )

    return report


def _resolve_model(args, cfg: RunConfig, stream, manifest: Manifest) -> BelsConfig:
    """The configured model, or the grid winner on the stream head when ``model: auto``."""
    if not cfg.auto:
        chosen = cfg.model
    else:
        items = head_size(len(stream))
        _say(args, f"selecting model on the first {items} items over {len(default_grid())} candidates")
        chosen, results = grid_select(stream.head(items), default_grid(cfg.model_base), cfg.window)
        manifest.add("grid_head_items", items)
        for i, (c, acc, cs) in enumerate(results):
            manifest.add(f"grid[{i}]", f"n={c.n} m={c.m} chunk_size={c.chunk_size} accuracy={acc:.6f} cs_per_1000={cs:.3f}")
    manifest.add("model_auto", cfg.auto)
    manifest.add("selected", f"n={chosen.n} m={chosen.m} chunk_size={chosen.chunk_size} variant={chosen.variant}")
    manifest.add("model", json.dumps(chosen.to_dict(), sort_keys=True))
    return chosen


def _setup(args) -> tuple[RunConfig, object, Manifest]:
    cfg = load_config(args.config, seed=args.seed)
    if args.output_dir is not None:
        cfg.output_dir = Path(args.output_dir)
    stream = build_stream(cfg.stream, cfg.seed)
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidConfig(f"cannot create output_dir {cfg.output_dir}: {exc.strerror}") from None
    return cfg, stream, Manifest(args.command, cfg)


def cmd_run(args) -> int:
    cfg, stream, manifest = _setup(args)
    out = cfg.output_dir
    state = None
    if args.resume:
        model, state = load_snapshot(args.resume)
        if model.d != stream.d or model.n_classes != stream.n_classes:
            raise InvalidConfig("snapshot does not match the configured stream")
        chosen = model.config
        manifest.add("resumed_from", args.resume)
        manifest.add("resumed_at_chunk", state.next_chunk if state else 0)
        manifest.add("model", json.dumps(chosen.to_dict(), sort_keys=True))
    else:
        chosen = _resolve_model(args, cfg, stream, manifest)
        model = BelsModel(chosen, stream.d, stream.n_classes)

    snap = out / "snapshot.npz"
    _say(args, f"running {chosen.variant} n={chosen.n} m={chosen.m} chunk_size={chosen.chunk_size}")
    series = evaluate(
        model,
        stream,
        cfg.window,
        chosen.chunk_size,
        _progress(args),
        state=state,
        checkpoint=lambda m, h: save_snapshot(snap, m, h),
        checkpoint_every=cfg.snapshot_every or 0,
    )
    if cfg.snapshot_every:
        manifest.add("snapshot", snap.name)
    write_series(series, out / "series.csv")
    manifest.add("series", "series.csv")
    manifest.add("final_accuracy", f"{series.final_accuracy:.6f}")
    manifest.add("cs_per_1000", f"{series.total_runtime_centiseconds_per_1000:.3f}")
    manifest.write(out)
    _say(args, f"final accuracy {series.final_accuracy:.4f}; wrote {out / 'series.csv'}")
    return 0


def cmd_ablate(args) -> int:
    cfg, stream, manifest = _setup(args)
    base = _resolve_model(args, cfg, stream, manifest)
    rows = []
    for variant in VARIANTS:
        _say(args, f"variant {variant}")
        series = evaluate(BelsModel(base.replace(variant=variant), stream.d, stream.n_classes), stream, cfg.window)
        write_series(series, cfg.output_dir / f"series_{variant}.csv")
        rows.append((variant, series.final_accuracy, series.total_runtime_centiseconds_per_1000))
    bls = rows[0][1]
    with open(cfg.output_dir / "ablation.csv", "w", encoding="utf-8") as fh:
        fh.write("variant,accuracy,cs_per_1000,improvement_pct\n")
        for variant, acc, cs in rows:
            gain = (acc - bls) / bls * 100 if bls else 0.0
            fh.write(f"{variant},{acc:.6f},{cs:.6f},{gain:.6f}\n")
    manifest.add("summary", "ablation.csv")
    manifest.write(cfg.output_dir)
    for variant, acc, cs in rows:
        _say(args, f"{variant:9s} accuracy {acc:.4f}  cs/1000 {cs:.2f}")
    return 0


def _parse_values(text: str, param: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidConfig(f"--values must be comma-separated integers, got {text!r}") from None
    if not values:
        raise InvalidConfig("--values is empty")
    lowest = 0 if param == "m_p" else 1
    if min(values) < lowest:
        raise InvalidConfig(f"{param} values must be >= {lowest}")
    return values


def cmd_sweep(args) -> int:
    values = _parse_values(args.values, args.param)
    cfg, stream, manifest = _setup(args)
    base = _resolve_model(args, cfg, stream, manifest)
    manifest.add("sweep_parameter", args.param)
    rows = []
    for v in values:
        _say(args, f"{args.param}={v}")
        config = base.replace(**{args.param: v})
        series = evaluate(BelsModel(config, stream.d, stream.n_classes), stream, cfg.window)
        rows.append((v, series.final_accuracy, series.total_runtime_centiseconds_per_1000))
    with open(cfg.output_dir / f"sweep_{args.param}.csv", "w", encoding="utf-8") as fh:
        fh.write("value,accuracy,cs_per_1000\n")
        for v, acc, cs in rows:
            fh.write(f"{v},{acc:.6f},{cs:.6f}\n")
    manifest.add("summary", f"sweep_{args.param}.csv")
    manifest.write(cfg.output_dir)
    return 0


def cmd_generate(args) -> int:
    try:
        raw = yaml.safe_load(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfig(f"cannot read spec {args.spec}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"spec {args.spec} is not valid YAML: {exc}") from None
    if isinstance(raw, dict) and "stream" not in raw and "type" in raw:
        raw = {"stream": raw}
    cfg = parse_config(raw, seed=args.seed, base_dir=Path(args.spec).parent)
    if args.count < 1:
        raise InvalidConfig("--count must be >= 1")
    stream = build_stream(cfg.stream, cfg.seed)
    written = write_csv(stream, args.out, args.count)
    _say(args, f"wrote {written} samples to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bels", description="Broad ensemble learning on drifting streams.")
    parser.add_argument("--version", action="version", version=f"bels {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", help="YAML run configuration")
            p.add_argument("--output-dir", help="override output_dir from the config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("run", help="prequential run of one configured model")
    common(p)
    p.add_argument("--resume", help="continue from a snapshot written by a previous run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="run all four variants on the same stream")
    common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="vary one hyperparameter, all else fixed")
    common(p)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma-separated integers, e.g. 1,2,5,10")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="write synthetic samples to CSV")
    p.add_argument("spec", help="YAML file with a stream section (or a bare stream mapping)")
    p.add_argument("out", help="output CSV path")
    p.add_argument("--count", type=int, required=True)
    common(p, config=False)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
