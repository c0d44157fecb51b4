"""Chunked labelled streams: synthetic drifting generators and CSV ingestion.

Every source is replayable: iterating it twice yields the same samples,
because the generator state is rebuilt from the seed on each pass. Samples
are produced in fixed-size blocks, so the sequence does not depend on the
chunk size the consumer asks for.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyStream, InvalidConfig, NonNumericFeature, ParseError

__all__ = [
    "SEA_THRESHOLDS",
    "LED_SEGMENTS",
    "ArrayStream",
    "Chunk",
    "DriftSchedule",
    "RunningStandardizer",
    "StreamSource",
    "csv_stream",
    "gaussian_bayes_error",
    "gaussian_clusters_stream",
    "hyperplane_label",
    "hyperplane_stream",
    "led_stream",
    "sea_label",
    "sea_stream",
    "write_csv",
]

BLOCK = 4096

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)

# seven-segment encoding of the digits 0-9
LED_SEGMENTS = np.array(
    [
        [1, 1, 1, 0, 1, 1, 1],
        [0, 0, 1, 0, 0, 1, 0],
        [1, 0, 1, 1, 1, 0, 1],
        [1, 0, 1, 1, 0, 1, 1],
        [0, 1, 1, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 1, 1],
        [1, 1, 0, 1, 1, 1, 1],
        [1, 0, 1, 0, 0, 1, 0],
        [1, 1, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 0, 1, 1],
    ],
    dtype=float,
)


@dataclass
class Chunk:
    x: np.ndarray
    y: np.ndarray
    start_index: int

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.y, axis=1)

    def __len__(self) -> int:
        return self.x.shape[0]


class RunningStandardizer:
    """Z-scores each sample with the mean and std of the samples before it.

    Rows with fewer than two predecessors map to zeros, and so does any entry
    whose column has had zero spread so far. Sums are kept relative to the
    first sample, which keeps constant columns at exactly zero.
    """

    def __init__(self, eps: float = 1e-12):
        self.eps = eps
        self.count = 0
        self.shift = None
        self.s1 = None
        self.s2 = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] == 0:
            return x.copy()
        if self.shift is None:
            self.shift = x[0].copy()
            self.s1 = np.zeros(x.shape[1])
            self.s2 = np.zeros(x.shape[1])
        xs = x - self.shift
        c1 = np.cumsum(xs, axis=0)
        c2 = np.cumsum(xs * xs, axis=0)
        # statistics of everything strictly before each row
        prev1 = self.s1 + np.vstack([np.zeros(x.shape[1]), c1[:-1]])
        prev2 = self.s2 + np.vstack([np.zeros(x.shape[1]), c2[:-1]])
        n = self.count + np.arange(x.shape[0], dtype=float)[:, None]
        safe_n = np.maximum(n, 1.0)
        mean = prev1 / safe_n
        var = np.maximum(prev2 / safe_n - mean * mean, 0.0)
        std = np.sqrt(var)
        # a column whose history is constant carries no scale yet; dividing
        # by eps would turn its first change into a huge outlier
        out = np.where(std > self.eps, (xs - mean) / np.maximum(std, self.eps), 0.0)
        out[n[:, 0] < 2] = 0.0
        self.s1 = self.s1 + c1[-1]
        self.s2 = self.s2 + c2[-1]
        self.count += x.shape[0]
        return out


class StreamSource:
    """Base class. Subclasses implement :meth:`_blocks`."""

    d: int
    n_classes: int
    n_samples: int | None = None
    default_chunk: int | None = None
    standardize: bool = False

    def _blocks(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        raise NotImplementedError

    def samples(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Blocks of ``(x, class_indices)``, standardized if requested."""
        scaler = RunningStandardizer() if self.standardize else None
        for x, labels in self._blocks():
            yield (scaler(x) if scaler else x), labels

    def chunks(self, size: int | None = None) -> Iterator[Chunk]:
        size = size or self.default_chunk
        if not size or size < 1:
            raise InvalidConfig("chunk size must be >= 1")
        eye = np.eye(self.n_classes)
        buf_x: list[np.ndarray] = []
        buf_y: list[np.ndarray] = []
        held = 0
        start = 0
        for x, labels in self.samples():
            buf_x.append(x)
            buf_y.append(labels)
            held += x.shape[0]
            if held < size:
                continue
            bx = np.concatenate(buf_x)
            by = np.concatenate(buf_y)
            full = (held // size) * size
            for i in range(0, full, size):
                yield Chunk(bx[i : i + size], eye[by[i : i + size]], start)
                start += size
            buf_x, buf_y = [bx[full:]], [by[full:]]
            held -= full
        if held:
            yield Chunk(np.concatenate(buf_x), eye[np.concatenate(buf_y)], start)

    def __iter__(self) -> Iterator[Chunk]:
        return self.chunks()

    def materialize(self, limit: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """All samples (or the first ``limit``) as ``(x, class_indices)`` arrays."""
        xs, ys, held = [], [], 0
        for x, labels in self.samples():
            xs.append(x)
            ys.append(labels)
            held += x.shape[0]
            if limit is not None and held >= limit:
                break
        if not xs:
            return np.zeros((0, self.d)), np.zeros(0, dtype=int)
        x, y = np.concatenate(xs), np.concatenate(ys)
        return (x[:limit], y[:limit]) if limit is not None else (x, y)

    def head(self, count: int) -> "ArrayStream":
        """The first ``count`` (already standardized) samples as an in-memory stream."""
        x, y = self.materialize(count)
        return ArrayStream(x, y, self.n_classes, default_chunk=self.default_chunk)

    def __len__(self) -> int:
        if self.n_samples is None:
            raise TypeError("unbounded stream")
        return self.n_samples


class ArrayStream(StreamSource):
    """A stream over arrays already in memory."""

    def __init__(self, x, labels, n_classes: int | None = None, *, default_chunk=None, standardize=False):
        self.x = np.asarray(x, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        if self.x.ndim != 2 or self.labels.shape != (self.x.shape[0],):
            raise InvalidConfig("x must be (rows, d) and labels (rows,)")
        self.d = self.x.shape[1]
        self.n_classes = int(n_classes if n_classes is not None else self.labels.max() + 1)
        self.n_samples = self.x.shape[0]
        self.default_chunk = default_chunk
        self.standardize = standardize

    def _blocks(self):
        for i in range(0, self.n_samples, BLOCK):
            yield self.x[i : i + BLOCK], self.labels[i : i + BLOCK]


@dataclass(frozen=True)
class DriftSchedule:
    """Consecutive concept segments joined by abrupt or gradual transitions.

    With ``width > 0`` the ``width`` samples after each boundary come from the
    new concept with probability rising linearly from 0 to 1.
    """

    lengths: tuple[int, ...]
    width: int = 0

    def __post_init__(self):
        if not self.lengths or min(self.lengths) < 1:
            raise InvalidConfig("segment lengths must be >= 1")
        if self.width < 0 or (self.width and self.width >= min(self.lengths)):
            raise InvalidConfig("gradual width must be smaller than every segment")

    @property
    def total(self) -> int:
        return int(sum(self.lengths))

    @property
    def boundaries(self) -> np.ndarray:
        return np.cumsum(self.lengths)[:-1]

    def segment_of(self, positions: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        seg = np.searchsorted(self.boundaries, positions, side="right")
        if self.width:
            # draws are made even for abrupt-region samples so the rng stays aligned
            u = rng.random(len(positions))
            starts = np.concatenate([[0], self.boundaries])[seg]
            offset = positions - starts
            ramping = (seg > 0) & (offset < self.width)
            p_new = (offset + 1) / (self.width + 1)
            seg = np.where(ramping & (u >= p_new), seg - 1, seg)
        return seg


def sea_label(x: np.ndarray, function: int | np.ndarray) -> np.ndarray:
    """Clean SEA concept: class 1 when ``f1 + f2 <= threshold``."""
    theta = np.asarray(SEA_THRESHOLDS)[function]
    return (x[..., 0] + x[..., 1] <= theta).astype(int)


class _SEA(StreamSource):
    def __init__(self, functions, segment_len, noise, seed, gradual_width, standardize):
        self.functions = np.asarray(functions, dtype=int)
        self.schedule = DriftSchedule(tuple([segment_len] * len(functions)), gradual_width)
        self.noise = noise
        self.seed = seed
        self.d, self.n_classes = 3, 2
        self.n_samples = self.schedule.total
        self.standardize = standardize

    def _blocks(self):
        rng = np.random.default_rng(self.seed)
        for start in range(0, self.n_samples, BLOCK):
            count = min(BLOCK, self.n_samples - start)
            x = rng.uniform(0.0, 10.0, size=(count, 3))
            seg = self.schedule.segment_of(np.arange(start, start + count), rng)
            labels = sea_label(x, self.functions[seg])
            flip = rng.random(count) < self.noise
            yield x, np.where(flip, 1 - labels, labels)


def sea_stream(
    functions: Sequence[int],
    segment_len: int,
    noise: float = 0.1,
    seed: int = 0,
    *,
    gradual_width: int = 0,
    standardize: bool = False,
) -> StreamSource:
    """SEA concepts over three features in [0, 10]; one segment per entry of ``functions``.

    ``functions=[0, 1, 2, 1, 0]`` with 20,000-sample segments is the
    "SEA-Abrupt-01210" layout. Labels are flipped with probability ``noise``.
    """
    if not functions or any(f not in (0, 1, 2, 3) for f in functions):
        raise InvalidConfig("functions must be a non-empty list drawn from {0, 1, 2, 3}")
    if not 0.0 <= noise < 0.5:
        raise InvalidConfig("noise must lie in [0, 0.5)")
    if segment_len < 1:
        raise InvalidConfig("segment_len must be >= 1")
    return _SEA(functions, segment_len, noise, seed, gradual_width, standardize)


def hyperplane_label(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Class 1 when ``x . w >= sum(w) / 2``."""
    w = np.asarray(w, dtype=float)
    return (np.sum(x * w, axis=-1) >= 0.5 * np.sum(w, axis=-1)).astype(int)


class _Hyperplane(StreamSource):
    def __init__(self, d, drift, seed, n_samples, sigma_pct, noise, standardize):
        self.d, self.n_classes = d, 2
        self.drift = drift
        self.seed = seed
        self.n_samples = n_samples
        self.sigma_pct = sigma_pct
        self.noise = noise
        self.standardize = standardize

    def _blocks(self):
        rng = np.random.default_rng(self.seed)
        w = rng.uniform(0.0, 1.0, self.d)
        direction = np.where(rng.random(self.d) < 0.5, -1.0, 1.0)
        for start in range(0, self.n_samples, BLOCK):
            count = min(BLOCK, self.n_samples - start)
            x = rng.uniform(0.0, 1.0, size=(count, self.d))
            reversals = rng.random((count, self.d)) < self.sigma_pct
            signs = direction * np.where(np.cumsum(reversals, axis=0) % 2 == 1, -1.0, 1.0)
            steps = np.cumsum(signs, axis=0) * self.drift
            # sample t sees the weights after t-1 moves
            weights = w + np.vstack([np.zeros(self.d), steps[:-1]])
            labels = hyperplane_label(x, weights)
            flip = rng.random(count) < self.noise
            w = w + steps[-1]
            direction = signs[-1]
            yield x, np.where(flip, 1 - labels, labels)


def hyperplane_stream(
    d: int,
    drift_per_sample: float,
    seed: int = 0,
    *,
    n_samples: int = 100_000,
    sigma_pct: float = 0.1,
    noise: float = 0.0,
    standardize: bool = False,
) -> StreamSource:
    """Rotating hyperplane in ``[0, 1]^d``; weights move ``drift_per_sample`` per sample.

    Each weight moves in its own direction, which reverses with probability
    ``sigma_pct`` per sample.
    """
    if d < 2:
        raise InvalidConfig("hyperplane needs d >= 2")
    if drift_per_sample < 0 or not 0 <= sigma_pct <= 1 or not 0 <= noise < 0.5 or n_samples < 1:
        raise InvalidConfig("invalid hyperplane parameters")
    return _Hyperplane(d, drift_per_sample, seed, n_samples, sigma_pct, noise, standardize)


class _LED(StreamSource):
    def __init__(self, drifting_features, noise, seed, n_samples, drift_at, standardize):
        self.d, self.n_classes = 24, 10
        self.drifting_features = drifting_features
        self.noise = noise
        self.seed = seed
        self.n_samples = n_samples
        self.drift_at = drift_at
        self.standardize = standardize
        targets = np.random.default_rng(seed).permutation(np.arange(7, 24))[:drifting_features]
        perm = np.arange(24)
        perm[:drifting_features], perm[targets] = targets, np.arange(drifting_features)
        self.permutation = perm

    def _blocks(self):
        rng = np.random.default_rng([self.seed, 1])
        for start in range(0, self.n_samples, BLOCK):
            count = min(BLOCK, self.n_samples - start)
            labels = rng.integers(0, 10, count)
            x = np.empty((count, 24))
            x[:, :7] = LED_SEGMENTS[labels]
            flip = rng.random((count, 7)) < self.noise
            x[:, :7] = np.where(flip, 1.0 - x[:, :7], x[:, :7])
            x[:, 7:] = rng.integers(0, 2, (count, 17))
            if self.drift_at is not None:
                after = np.arange(start, start + count) >= self.drift_at
                x[after] = x[after][:, self.permutation]
            yield x, labels


def led_stream(
    drifting_features: int = 7,
    noise: float = 0.0,
    seed: int = 0,
    *,
    n_samples: int = 100_000,
    drift_at: int | None = None,
    standardize: bool = False,
) -> StreamSource:
    """Seven-segment digits plus 17 random bits, 10 classes.

    From sample ``drift_at`` on (never when ``None``), each of the first
    ``drifting_features`` segment bits trades places with an irrelevant bit.
    """
    if not 0 <= drifting_features <= 7:
        raise InvalidConfig("drifting_features must lie in [0, 7]")
    if not 0.0 <= noise < 1.0 or n_samples < 1:
        raise InvalidConfig("invalid LED parameters")
    return _LED(drifting_features, noise, seed, n_samples, drift_at, standardize)


class _Gaussian(StreamSource):
    def __init__(self, means, sigma, segment_len, seed, n_segments, drift, shift, gradual_width, standardize):
        self.means = means
        self.sigma = sigma
        self.seed = seed
        self.drift = drift
        self.shift = shift
        self.schedule = DriftSchedule(tuple([segment_len] * n_segments), gradual_width)
        self.n_classes, self.d = means.shape
        self.n_samples = self.schedule.total
        self.standardize = standardize

    def segment_means(self, segment: int) -> np.ndarray:
        if self.drift == "interchange":
            return np.roll(self.means, -segment, axis=0)
        if self.drift == "translate":
            return self.means + segment * self.shift
        return self.means

    def _blocks(self):
        rng = np.random.default_rng(self.seed)
        table = np.stack([self.segment_means(s) for s in range(len(self.schedule.lengths))])
        for start in range(0, self.n_samples, BLOCK):
            count = min(BLOCK, self.n_samples - start)
            labels = rng.integers(0, self.n_classes, count)
            seg = self.schedule.segment_of(np.arange(start, start + count), rng)
            x = table[seg, labels] + self.sigma * rng.standard_normal((count, self.d))
            yield x, labels


def gaussian_clusters_stream(
    means,
    sigma: float,
    segment_len: int,
    seed: int = 0,
    *,
    n_segments: int = 1,
    drift: str = "interchange",
    shift=None,
    gradual_width: int = 0,
    standardize: bool = False,
) -> StreamSource:
    """One isotropic Gaussian per class, classes equally likely.

    ``drift="interchange"`` rotates which class owns which mean at every
    segment boundary (a swap for two classes); ``"translate"`` moves every
    mean by ``shift`` per segment; ``"none"`` keeps the concept fixed.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    if means.shape[0] < 2:
        raise InvalidConfig("need at least two class means")
    if sigma < 0 or segment_len < 1 or n_segments < 1:
        raise InvalidConfig("sigma >= 0, segment_len >= 1, n_segments >= 1 required")
    if drift not in ("interchange", "translate", "none"):
        raise InvalidConfig(f"unknown drift kind {drift!r}")
    shift = np.zeros(means.shape[1]) if shift is None else np.broadcast_to(np.asarray(shift, float), means.shape[1:])
    return _Gaussian(means, sigma, segment_len, seed, n_segments, drift, shift, gradual_width, standardize)


def gaussian_bayes_error(mean_a, mean_b, sigma: float) -> float:
    """Bayes error of two equiprobable isotropic Gaussians sharing ``sigma``."""
    dist = float(np.linalg.norm(np.asarray(mean_a, float) - np.asarray(mean_b, float)))
    return 0.5 * math.erfc(dist / (2.0 * sigma) / math.sqrt(2.0))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


class _CSV(ArrayStream):
    def __init__(self, x, labels, n_classes, classes, feature_names, chunk, standardize):
        super().__init__(x, labels, n_classes, default_chunk=chunk, standardize=standardize)
        self.classes = classes
        self.feature_names = feature_names


def csv_stream(
    path: str | os.PathLike,
    label_column: str | int = -1,
    chunk: int | None = None,
    standardize: bool = False,
    *,
    header: bool | None = None,
    categorical: Sequence[str | int] = (),
    classes: Sequence[str] | None = None,
) -> StreamSource:
    """Rows of a comma-separated file, in file order.

    Labels become class indices by order of first appearance unless
    ``classes`` fixes the order. Columns listed in ``categorical`` are one-hot
    encoded (categories in order of first appearance); any other non-numeric
    feature raises :class:`NonNumericFeature`. ``header=None`` treats the
    first row as a header when ``label_column`` is a name or when none of its
    fields parse as numbers.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if r and any(f.strip() for f in r)]
    if not rows:
        raise EmptyStream(f"{path} has no rows")

    first_line, first = rows[0]
    if header is None:
        header = isinstance(label_column, str) or not any(_is_number(f) for f in first)
    if header:
        names = [f.strip() for f in first]
        rows = rows[1:]
    else:
        names = [str(i) for i in range(len(first))]
    if not rows:
        raise EmptyStream(f"{path} has a header but no data")
    width = len(names)

    def col_index(ref) -> int:
        if isinstance(ref, str) and not ref.lstrip("-").isdigit():
            if ref not in names:
                raise ParseError(f"column {ref!r} not found", first_line)
            return names.index(ref)
        idx = int(ref)
        if not -width <= idx < width:
            raise ParseError(f"column index {idx} out of range", first_line)
        return idx % width

    label_idx = col_index(label_column)
    cat_idx = {col_index(c) for c in categorical}
    feature_cols = [j for j in range(width) if j != label_idx]

    class_map: dict[str, int] = {c: i for i, c in enumerate(classes)} if classes else {}
    cat_values: dict[int, dict[str, int]] = {j: {} for j in cat_idx}
    raw_labels, raw_rows = [], []
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line)
        row = [f.strip() for f in row]
        label = row[label_idx]
        if label not in class_map:
            if classes:
                raise ParseError(f"label {label!r} not in the given classes", line)
            class_map[label] = len(class_map)
        raw_labels.append(class_map[label])
        for j in cat_idx:
            cat_values[j].setdefault(row[j], len(cat_values[j]))
        raw_rows.append((line, row))

    out_names: list[str] = []
    for j in feature_cols:
        if j in cat_idx:
            out_names.extend(f"{names[j]}={v}" for v in cat_values[j])
        else:
            out_names.append(names[j])
    x = np.zeros((len(raw_rows), len(out_names)))
    for r, (line, row) in enumerate(raw_rows):
        k = 0
        for j in feature_cols:
            if j in cat_idx:
                x[r, k + cat_values[j][row[j]]] = 1.0
                k += len(cat_values[j])
                continue
            try:
                v = float(row[j])
            except ValueError:
                raise NonNumericFeature(names[j], line, row[j]) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value in column {names[j]!r}", line)
            x[r, k] = v
            k += 1

    n_classes = max(len(class_map), 2)
    return _CSV(x, np.asarray(raw_labels), n_classes, list(class_map), out_names, chunk, standardize)


def write_csv(stream: StreamSource, path: str | os.PathLike, count: int | None = None) -> int:
    """Write ``count`` samples as ``f0,...,f{d-1},label``; returns the rows written.

    Floats are written with ``repr`` so reading the file back is exact.
    """
    written = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow([f"f{i}" for i in range(stream.d)] + ["label"])
        for x, labels in stream.samples():
            if count is not None:
                x, labels = x[: count - written], labels[: count - written]
            for row, lab in zip(x, labels):
                out.writerow([repr(float(v)) for v in row] + [int(lab)])
            written += len(labels)
            if count is not None and written >= count:
                break
    return written
