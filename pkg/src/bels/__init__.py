"""Broad ensemble learning for drifting data streams."""

from .ensemble import PRESETS, VARIANTS, BelsConfig, BelsModel, ChunkResult, preset, run_variant, vote
from .errors import (
    BelsError,
    EmptyStream,
    InvalidConfig,
    NonNumericFeature,
    ParseError,
    ShapeMismatch,
    SingularSystem,
)
from .features import FeatureSpace
from .output_layer import OutputLayer, score_accuracy
from .prequential import HarnessState, PrequentialSeries, evaluate, grid_select, read_series, write_series
from .snapshot import load_snapshot, save_snapshot
from .streams import (
    csv_stream,
    gaussian_clusters_stream,
    hyperplane_stream,
    led_stream,
    sea_stream,
)

__version__ = "0.1.0"
