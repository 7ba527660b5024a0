"""Geographic data-leakage auditing, disjoint split design, and
vectorized-map evaluation for autonomous-driving pose logs."""

from .version import __version__

from .ingest import Dataset, MapElement, Sample, load_map_elements, load_samples, resample_sequences
from .leakage import LeakageReport, SplitAssignment, audit, buffer_filter, distance_curve
from .mapeval import EvalReport, RasterSpec, ap_at_threshold, chamfer, evaluate, iou, rasterize
from .spatial import CellHistogram, SpatialIndex, build_index, cell_histogram, heatmap_export, nearest_distance
from .split import (
    BalanceReport,
    CutReport,
    FoldSpec,
    Region,
    RegionSet,
    assign_by_regions,
    auto_partition,
    balance_report,
    citywise_folds,
    validate_split,
)

__all__ = [
    "__version__",
    "Dataset", "MapElement", "Sample", "load_map_elements", "load_samples", "resample_sequences",
    "LeakageReport", "SplitAssignment", "audit", "buffer_filter", "distance_curve",
    "EvalReport", "RasterSpec", "ap_at_threshold", "chamfer", "evaluate", "iou", "rasterize",
    "CellHistogram", "SpatialIndex", "build_index", "cell_histogram", "heatmap_export", "nearest_distance",
    "BalanceReport", "CutReport", "FoldSpec", "Region", "RegionSet",
    "assign_by_regions", "auto_partition", "balance_report", "citywise_folds", "validate_split",
]
