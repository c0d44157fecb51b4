"""Model snapshots: every matrix and counter needed to continue a run bit-exactly.

A snapshot is an uncompressed ``.npz`` archive (``allow_pickle`` is never
needed). The entry ``header`` holds a UTF-8 JSON document::

    {"format": "bels-snapshot", "version": 1,
     "config": {...BelsConfig fields...},
     "d": 3, "n_classes": 2, "seed": 0, "chunk_index": 120,
     "model": {...counters, ensemble scalars, member metadata...},
     "harness": {...prequential counters...} or null}

Array entries:

- ``fs/<name>`` for the feature space (``w_e``, ``beta_e``, ``w_h``,
  ``beta_h``, ``t1``, ``t2``, ``mu``),
- ``active/a_t``, ``active/d_t``, ``active/w`` stacked over active members,
- the same three under ``pool/`` for pooled members,
- ``harness/recent`` (window hits) and ``harness/records`` (one row per
  record, columns as in the series CSV).
"""

from __future__ import annotations

import json
import os

import numpy as np

from .ensemble import BelsConfig, BelsModel
from .errors import BelsError
from .output_layer import OutputLayer
from .prequential import HarnessState, PrequentialRecord

__all__ = ["FORMAT", "VERSION", "load_snapshot", "read_header", "save_snapshot"]

FORMAT = "bels-snapshot"
VERSION = 1


def _layers_to_arrays(prefix: str, layers: list[OutputLayer], width: int, c: int) -> dict:
    def stack(attr, shape):
        if not layers:
            return np.zeros((0, *shape))
        return np.stack([getattr(l, attr) for l in layers])

    return {
        f"{prefix}/a_t": stack("a_t", (width, width)),
        f"{prefix}/d_t": stack("d_t", (width, c)),
        f"{prefix}/w": stack("w", (width, c)),
    }


def _layer_meta(layers: list[OutputLayer]) -> list[dict]:
    return [
        {"id": l.id, "chunks_trained": l.chunks_trained, "last_accuracy": l.last_accuracy}
        for l in layers
    ]


def save_snapshot(path: str | os.PathLike, model: BelsModel, harness: HarnessState | None = None) -> None:
    """Write ``model`` (and optionally the harness counters) to ``path``."""
    if model._pending is not None:
        raise BelsError("cannot snapshot between predict and learn")
    ens = model.ensemble
    fs = model.feature_space
    width, c = fs.width, model.n_classes
    header = {
        "format": FORMAT,
        "version": VERSION,
        "config": model.config.to_dict(),
        "d": model.d,
        "n_classes": c,
        "seed": model.config.seed,
        "chunk_index": model.chunks_processed,
        "model": {
            "next_instance_id": model.next_instance_id,
            "instances_created": model.instances_created,
            "chunks_processed": model.chunks_processed,
            "feature_chunks_seen": fs.chunks_seen,
            "delta": ens.delta,
            "overall_correct": ens.overall_correct,
            "overall_seen": ens.overall_seen,
            "candidates": list(ens.candidates),
            "removal_list": list(ens.removal_list),
            "active": _layer_meta(ens.active),
            "pool": _layer_meta(ens.pool),
        },
        "harness": None,
    }
    arrays = {f"fs/{k}": v for k, v in fs.arrays().items()}
    arrays.update(_layers_to_arrays("active", ens.active, width, c))
    arrays.update(_layers_to_arrays("pool", ens.pool, width, c))
    if harness is not None:
        header["harness"] = {
            "next_chunk": harness.next_chunk,
            "correct": harness.correct,
            "seen": harness.seen,
            "elapsed": harness.elapsed,
        }
        arrays["harness/recent"] = np.array(harness.recent, dtype=bool)
        arrays["harness/records"] = np.array(
            [
                [r.chunk_index, r.samples_seen, r.cumulative_accuracy, r.window_accuracy,
                 r.elapsed_centiseconds_per_1000]
                for r in harness.records
            ],
            dtype=float,
        ).reshape(-1, 5)
    arrays["header"] = np.array(json.dumps(header, sort_keys=True))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def read_header(path: str | os.PathLike) -> dict:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
    _check_header(header)
    return header


def _check_header(header: dict) -> None:
    if header.get("format") != FORMAT:
        raise BelsError(f"not a model snapshot (format={header.get('format')!r})")
    if header.get("version") != VERSION:
        raise BelsError(f"unsupported snapshot version {header.get('version')!r}")


def _restore_layers(meta: list[dict], data, prefix: str, model: BelsModel) -> list[OutputLayer]:
    layers = []
    for i, m in enumerate(meta):
        layer = OutputLayer(model.feature_space.width, model.n_classes, model.config.lambda_ridge, id=m["id"])
        layer.a_t = data[f"{prefix}/a_t"][i].copy()
        layer.d_t = data[f"{prefix}/d_t"][i].copy()
        layer.w = data[f"{prefix}/w"][i].copy()
        layer.chunks_trained = m["chunks_trained"]
        layer.last_accuracy = m["last_accuracy"]
        layers.append(layer)
    return layers


def load_snapshot(path: str | os.PathLike) -> tuple[BelsModel, HarnessState | None]:
    """Rebuild the model saved by :func:`save_snapshot` and its harness counters, if any."""
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        _check_header(header)
        model = BelsModel(BelsConfig(**header["config"]), header["d"], header["n_classes"])
        fs = model.feature_space
        for name in fs.arrays():
            setattr(fs, name, data[f"fs/{name}"].copy())
        info = header["model"]
        fs.chunks_seen = info["feature_chunks_seen"]
        model.next_instance_id = info["next_instance_id"]
        model.instances_created = info["instances_created"]
        model.chunks_processed = info["chunks_processed"]
        ens = model.ensemble
        ens.delta = info["delta"]
        ens.overall_correct = info["overall_correct"]
        ens.overall_seen = info["overall_seen"]
        ens.candidates = list(info["candidates"])
        ens.removal_list = list(info["removal_list"])
        ens.active = _restore_layers(info["active"], data, "active", model)
        ens.pool = _restore_layers(info["pool"], data, "pool", model)

        harness = None
        if header["harness"] is not None:
            h = header["harness"]
            rows = data["harness/records"]
            harness = HarnessState(
                h["next_chunk"],
                h["correct"],
                h["seen"],
                h["elapsed"],
                [bool(v) for v in data["harness/recent"]],
                [PrequentialRecord(int(r[0]), int(r[1]), r[2], r[3], r[4]) for r in rows],
            )
    return model, harness
