"""Interleaved test-then-train evaluation, grid selection and series CSV output."""

from __future__ import annotations

import csv
import os
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .ensemble import PRESETS, BelsConfig, BelsModel
from .errors import EmptyStream, InvalidConfig

__all__ = [
    "CHUNK_GRID",
    "HEADER",
    "HarnessState",
    "PrequentialRecord",
    "PrequentialSeries",
    "StreamModel",
    "default_grid",
    "evaluate",
    "grid_select",
    "head_size",
    "read_series",
    "write_series",
]

HEADER = "chunk_index,samples_seen,cumulative_accuracy,window_accuracy,cs_per_1000"
CHUNK_GRID = (2, 5, 10, 20, 50)


class StreamModel(Protocol):
    def predict(self, x: np.ndarray) -> np.ndarray: ...

    def learn(self, x: np.ndarray, y: np.ndarray): ...


@dataclass
class PrequentialRecord:
    chunk_index: int
    samples_seen: int
    cumulative_accuracy: float
    window_accuracy: float
    elapsed_centiseconds_per_1000: float


@dataclass
class PrequentialSeries:
    records: list[PrequentialRecord] = field(default_factory=list)
    final_accuracy: float = 0.0
    total_runtime_centiseconds_per_1000: float = 0.0
    config_echo: BelsConfig | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass
class HarnessState:
    """Running counters of :func:`evaluate`; enough to continue a run after a snapshot."""

    next_chunk: int = 0
    correct: int = 0
    seen: int = 0
    elapsed: float = 0.0
    recent: list[bool] = field(default_factory=list)
    records: list[PrequentialRecord] = field(default_factory=list)


def evaluate(
    model: StreamModel,
    stream,
    window: int = 1000,
    chunk_size: int | None = None,
    progress=None,
    *,
    state: HarnessState | None = None,
    checkpoint=None,
    checkpoint_every: int = 0,
) -> PrequentialSeries:
    """Predict each chunk, score it, then hand the labels to the model.

    Only ``model.predict`` and ``model.learn`` are timed; producing the chunks
    is not. ``progress``, if given, is called with each new record.

    To resume, pass the ``state`` saved alongside the model: chunks before
    ``state.next_chunk`` are replayed from the stream but skipped.
    ``checkpoint(model, state)`` is called every ``checkpoint_every`` chunks.
    """
    if window < 1:
        raise InvalidConfig("window must be >= 1")
    config = getattr(model, "config", None)
    if chunk_size is None:
        chunk_size = getattr(config, "chunk_size", None) or getattr(stream, "default_chunk", None)
    if not chunk_size:
        raise InvalidConfig("no chunk size given and none on the model or stream")

    st = state or HarnessState()
    recent: deque[bool] = deque(st.recent[-window:])
    in_window = sum(recent)
    records = list(st.records)
    correct, seen, elapsed = st.correct, st.seen, st.elapsed
    for k, chunk in enumerate(stream.chunks(chunk_size)):
        if k < st.next_chunk:
            continue
        t0 = time.perf_counter()
        pred = np.asarray(model.predict(chunk.x))
        t1 = time.perf_counter()
        # labels are touched only from here on
        truth = chunk.labels
        hits = pred == truth
        t2 = time.perf_counter()
        model.learn(chunk.x, chunk.y)
        elapsed += (t1 - t0) + (time.perf_counter() - t2)

        correct += int(hits.sum())
        seen += len(hits)
        for hit in hits:
            recent.append(bool(hit))
            in_window += hit
            if len(recent) > window:
                in_window -= recent.popleft()
        record = PrequentialRecord(
            k, seen, correct / seen, in_window / len(recent), elapsed * 1e5 / seen
        )
        records.append(record)
        if progress is not None:
            progress(record)
        if checkpoint is not None and checkpoint_every and (k + 1) % checkpoint_every == 0:
            checkpoint(model, HarnessState(k + 1, correct, seen, elapsed, list(recent), list(records)))
    if not records:
        raise EmptyStream("stream produced no samples")
    series = PrequentialSeries(records=records, config_echo=config)
    series.final_accuracy = records[-1].cumulative_accuracy
    series.total_runtime_centiseconds_per_1000 = records[-1].elapsed_centiseconds_per_1000
    return series


def default_grid(base: BelsConfig | None = None, chunk_sizes: Sequence[int] = CHUNK_GRID) -> list[BelsConfig]:
    """The 15 standard candidates: three model sizes times five chunk sizes."""
    base = base or BelsConfig()
    return [
        base.replace(n=n, m=m, chunk_size=s)
        for n, m in PRESETS.values()
        for s in chunk_sizes
    ]


def head_size(stream_length: int | None) -> int:
    """Items used for selection: 1000, or 100 for streams shorter than 2000."""
    if stream_length is not None and stream_length < 2000:
        return 100
    return 1000


def _modelled_cost(config: BelsConfig, items: int) -> float:
    # chunks * dominant per-chunk output layer cost
    s, w = config.chunk_size, config.width
    return (items / s) * max(s, w) ** 2 * min(s, w)


def grid_select(stream_head, candidates: Sequence[BelsConfig], window: int = 1000):
    """Return ``(best_config, results)`` after a prequential pass of every candidate.

    ``results`` holds ``(config, final_accuracy, cs_per_1000)`` per candidate.
    Accuracy ties go to the cheaper candidate by the modelled cost of the
    output layer updates, then to the earlier grid position; wall-clock time is
    reported but not used, so selection is reproducible.
    """
    if not candidates:
        raise InvalidConfig("grid_select needs at least one candidate")
    x, labels = stream_head.materialize()
    if len(labels) == 0:
        raise EmptyStream("empty stream head")
    from .streams import ArrayStream

    results = []
    for cfg in candidates:
        head = ArrayStream(x, labels, stream_head.n_classes)
        series = evaluate(BelsModel(cfg, head.d, head.n_classes), head, window, cfg.chunk_size)
        results.append((cfg, series.final_accuracy, series.total_runtime_centiseconds_per_1000))
    best = min(
        range(len(results)),
        key=lambda i: (-results[i][1], _modelled_cost(results[i][0], len(labels)), i),
    )
    return results[best][0], results


def write_series(series: PrequentialSeries, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        for r in series.records:
            fh.write(
                f"{r.chunk_index},{r.samples_seen},{r.cumulative_accuracy:.6f},"
                f"{r.window_accuracy:.6f},{r.elapsed_centiseconds_per_1000:.6f}\n"
            )
        fh.write(
            f"#summary,final_accuracy={series.final_accuracy:.6f},"
            f"cs_per_1000={series.total_runtime_centiseconds_per_1000:.6f}\n"
        )


def read_series(path: str | os.PathLike) -> PrequentialSeries:
    series = PrequentialSeries()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for row in reader:
            if row and row[0] == "#summary":
                fields = dict(item.split("=", 1) for item in row[1:])
                series.final_accuracy = float(fields["final_accuracy"])
                series.total_runtime_centiseconds_per_1000 = float(fields["cs_per_1000"])
                continue
            series.records.append(
                PrequentialRecord(int(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4]))
            )
    return series
