"""Optimal boxes for segmentation masks and relative-IoU evaluation."""

from .boxes import (
    OrientedBox,
    canonicalize,
    corners,
    format_box_line,
    iou_box_box,
    iou_box_mask,
    mask_intersection_area,
    parse_box_line,
)
from .errors import (
    BudgetExceededError,
    EmptyFirstFrameError,
    EmptyMaskError,
    EmptySequenceError,
    EvaluationConfigError,
    InvalidBoxError,
    MaskFormatError,
    TrackerRunError,
)
from .masks import (
    MomentsSummary,
    SegMask,
    axis_aligned_bbox,
    largest_inner_axis_aligned_box,
    largest_inner_circle_square,
    load_mask,
    moments,
    oriented_bbox,
    second_moments_box,
)
from .optimize import (
    BoxFamily,
    OptimizerConfig,
    OptResult,
    ascend_from,
    numeric_gradient,
    optimize,
    seed_boxes,
)
from .oracle import OracleResult, exhaustive_axis_aligned, grid_oriented
from .theoretical import MaskSequence, TheoreticalTrack, export_curves, run_theoretical
from .evaluate import (
    DatasetReport,
    FrameScore,
    SequenceEval,
    TrackerRun,
    aggregate_dataset,
    emit_init_box,
    load_tracker_run,
    score_run,
    track_as_run,
    write_tracker_run,
)

__version__ = "0.1.0"
