"""Run configuration files.

One YAML file drives one experiment::

    seed: 1
    window: 1000
    output_dir: runs/sea
    snapshot_every: null      # chunks between snapshots, or null
    stream:
      type: sea               # sea | hyperplane | led | gaussian | csv
      functions: [0, 1, 2, 1, 0]
      segment_len: 20000
      noise: 0.1
    model: auto               # or a mapping, see below

``stream`` keys other than ``type`` are passed to the generator of that
name (``sea_stream``, ``hyperplane_stream``, ``led_stream``,
``gaussian_clusters_stream``, ``csv_stream``); ``standardize`` defaults to
true here, and a relative ``path`` is resolved against the config file's
directory. ``seed`` seeds both the generator and the model unless the
stream section sets its own. ``output_dir`` is relative to the working
directory.

``model`` is ``auto`` (grid selection on the stream head), or a mapping of
:class:`BelsConfig` fields, optionally with ``preset: BELS1|BELS2|BELS3``
supplying ``n`` and ``m``. ``model: {auto: true, variant: BELS-Ens}``
selects by grid but keeps the other given fields.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import yaml

from .ensemble import PRESETS, BelsConfig
from .errors import InvalidConfig
from .streams import (
    csv_stream,
    gaussian_clusters_stream,
    hyperplane_stream,
    led_stream,
    sea_stream,
)

__all__ = ["GENERATORS", "RunConfig", "build_stream", "load_config", "parse_config"]

GENERATORS = {
    "sea": sea_stream,
    "hyperplane": hyperplane_stream,
    "led": led_stream,
    "gaussian": gaussian_clusters_stream,
    "csv": csv_stream,
}

_MODEL_FIELDS = {f.name for f in fields(BelsConfig)}


@dataclass
class RunConfig:
    stream: dict
    model: BelsConfig | None  # None means grid selection
    model_base: BelsConfig
    output_dir: Path
    window: int = 1000
    snapshot_every: int | None = None
    seed: int = 0
    source: str | None = None

    @property
    def auto(self) -> bool:
        return self.model is None

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "window": self.window,
            "output_dir": str(self.output_dir),
            "snapshot_every": self.snapshot_every,
            "stream": self.stream,
            "model": "auto" if self.auto else self.model.to_dict(),
        }


def _require(mapping: dict, key: str, where: str) -> Any:
    if not isinstance(mapping, dict) or key not in mapping:
        raise InvalidConfig(f"missing required key '{key}' in {where}")
    return mapping[key]


def _model_section(raw, seed: int) -> tuple[BelsConfig | None, BelsConfig]:
    if raw is None or raw == "auto":
        return None, BelsConfig(seed=seed)
    if not isinstance(raw, dict):
        raise InvalidConfig("model must be 'auto' or a mapping of model fields")
    raw = dict(raw)
    auto = bool(raw.pop("auto", False))
    name = raw.pop("preset", None)
    if name is not None:
        if name not in PRESETS:
            raise InvalidConfig(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
        raw.setdefault("n", PRESETS[name][0])
        raw.setdefault("m", PRESETS[name][1])
    unknown = set(raw) - _MODEL_FIELDS
    if unknown:
        raise InvalidConfig(f"unknown model key(s): {', '.join(sorted(unknown))}")
    raw["seed"] = seed
    cfg = BelsConfig(**raw)
    return (None if auto else cfg), cfg


def parse_config(raw: dict, *, seed: int | None = None, base_dir: str | os.PathLike = ".") -> RunConfig:
    """Validate a parsed YAML document; ``seed`` overrides the file's seed."""
    if not isinstance(raw, dict):
        raise InvalidConfig("config must be a mapping")
    stream = dict(_require(raw, "stream", "config"))
    kind = _require(stream, "type", "stream")
    if kind not in GENERATORS:
        raise InvalidConfig(f"unknown stream type {kind!r}; expected one of {sorted(GENERATORS)}")
    if kind == "csv":
        _require(stream, "path", "stream")
        stream["path"] = str(Path(base_dir) / stream["path"])
    stream.setdefault("standardize", True)
    seed = int(raw.get("seed", 0) if seed is None else seed)
    model, base = _model_section(raw.get("model", "auto"), seed)
    window = int(raw.get("window", 1000))
    if window < 1:
        raise InvalidConfig("window must be >= 1")
    every = raw.get("snapshot_every")
    if every is not None and int(every) < 1:
        raise InvalidConfig("snapshot_every must be >= 1 or null")
    out = Path(str(raw.get("output_dir", "runs/out")))
    return RunConfig(stream, model, base, out, window, None if every is None else int(every), seed)


def load_config(path: str | os.PathLike, *, seed: int | None = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"config {path} is not valid YAML: {exc}") from None
    cfg = parse_config(raw, seed=seed, base_dir=Path(path).parent)
    cfg.source = str(path)
    return cfg


def build_stream(spec: dict, seed: int):
    """Instantiate the stream described by a config ``stream`` section."""
    spec = dict(spec)
    kind = _require(spec, "type", "stream")
    try:
        make = GENERATORS[kind]
    except KeyError:
        raise InvalidConfig(f"unknown stream type {kind!r}") from None
    spec.pop("type")
    if kind == "csv":
        path = spec.pop("path")
        spec.setdefault("label_column", -1)
        try:
            return make(path, **spec)
        except TypeError as exc:
            raise InvalidConfig(f"bad csv stream options: {exc}") from None
    spec.setdefault("seed", seed)
    try:
        return make(**spec)
    except TypeError as exc:
        raise InvalidConfig(f"bad {kind} stream options: {exc}") from None
