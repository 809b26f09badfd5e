"""Exhaustive-search references used to validate the gradient optimizer.

The axis-aligned oracle is a true maximum over every box with integer
cell-boundary coordinates; candidates are compared with exact integer
arithmetic, so its result is independent of float rounding.  The oriented
grid search scores rotated rasterizations and is a lower bound on the true
oriented optimum: a pixel-level grid cannot represent the sub-pixel
boundaries (especially the sub-degree angles) that the optimizer reaches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import best_integer_box
from .boxes import OrientedBox, canonicalize, iou_box_mask
from .errors import BudgetExceededError, EmptyMaskError
from .masks import SegMask

DEFAULT_BUDGET = 128 * 128


@dataclass(frozen=True)
class OracleResult:
    box: OrientedBox
    phi_value: float
    candidates_evaluated: int


def _check_budget(mask: SegMask, budget_pixels: int) -> None:
    if mask.is_empty:
        raise EmptyMaskError("oracle needs a non-empty mask")
    if mask.width * mask.height > budget_pixels:
        raise BudgetExceededError(
            f"mask is {mask.width}x{mask.height} = {mask.width * mask.height} px, "
            f"budget is {budget_pixels}; validate a downsampled copy instead"
        )


def integral_image(grid: np.ndarray) -> np.ndarray:
    """(H+1, W+1) zero-padded cumulative sum table of a 0/1 grid."""
    h, w = grid.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(grid, axis=0, dtype=np.int64), axis=1, out=ii[1:, 1:])
    return ii


def box_sum(ii: np.ndarray, r0: int, c0: int, r1: int, c1: int) -> int:
    """Foreground count in rows [r0, r1) x cols [c0, c1) via the table."""
    return int(ii[r1, c1] - ii[r0, c1] - ii[r1, c0] + ii[r0, c0])


def exhaustive_axis_aligned(mask: SegMask, budget_pixels: int = DEFAULT_BUDGET) -> OracleResult:
    """Best axis-aligned box over all integer cell-boundary candidates.

    Candidates are enumerated in (r0, c0, r1, c1) lexicographic order and
    only a strictly better IoU replaces the incumbent, so ties resolve to
    the first candidate in row-major scan order.
    """
    _check_budget(mask, budget_pixels)
    ii = integral_image(mask.to_array().astype(np.int64))
    inter, union, r0, c0, r1, c1, scored = best_integer_box(ii, mask.area)
    box = OrientedBox(0.5 * (r0 + r1), 0.5 * (c0 + c1), float(c1 - c0), float(r1 - r0), 0.0)
    return OracleResult(box=box, phi_value=inter / union, candidates_evaluated=scored)


def _rotation(theta_rad: float) -> np.ndarray:
    """Maps the w-axis direction (sin t, cos t) onto the column axis."""
    c, s = math.cos(theta_rad), math.sin(theta_rad)
    return np.array([[c, -s], [s, c]])


def grid_oriented(mask: SegMask, angle_step: float = 0.5,
                  budget_pixels: int = DEFAULT_BUDGET) -> OracleResult:
    """Best oriented box on a pixel/angle grid, re-scored exactly.

    For each angle the mask is resampled (nearest neighbor) into the frame
    where boxes of that angle are axis-aligned, all integer-boundary boxes
    are scored against an integral image of that raster, and the winning
    candidate is mapped back and re-scored with the exact sub-pixel
    objective.  The best exact score across angles is returned; because the
    raster is only pixel-accurate this is a lower bound on the true optimum.
    """
    _check_budget(mask, budget_pixels)
    if angle_step <= 0:
        raise ValueError("angle_step must be positive")
    grid = mask.to_array()
    bbox_pts = np.array([
        [float(mask.runs[0, 0]), float(mask.runs[:, 1].min())],
        [float(mask.runs[0, 0]), float(mask.runs[:, 2].max())],
        [float(mask.runs[-1, 0] + 1), float(mask.runs[:, 1].min())],
        [float(mask.runs[-1, 0] + 1), float(mask.runs[:, 2].max())],
    ])

    best: OrientedBox | None = None
    best_phi = -1.0
    total_scored = 0
    for theta_deg in np.arange(0.0, 90.0, angle_step):
        theta = math.radians(float(theta_deg))
        rot = _rotation(theta)
        q = bbox_pts @ rot.T
        off_r = math.floor(q[:, 0].min())
        off_c = math.floor(q[:, 1].min())
        hh = int(math.ceil(q[:, 0].max()) - off_r)
        ww = int(math.ceil(q[:, 1].max()) - off_c)
        # nearest-neighbor resample: target cell centers pulled back to source
        qr, qc = np.meshgrid(np.arange(hh) + off_r + 0.5,
                             np.arange(ww) + off_c + 0.5, indexing="ij")
        pr = rot[0, 0] * qr + rot[1, 0] * qc  # inverse = transpose
        pc = rot[0, 1] * qr + rot[1, 1] * qc
        sr = np.floor(pr).astype(np.int64)
        sc = np.floor(pc).astype(np.int64)
        valid = (sr >= 0) & (sr < mask.height) & (sc >= 0) & (sc < mask.width)
        raster = np.zeros((hh, ww), dtype=np.int64)
        raster[valid] = grid[sr[valid], sc[valid]]
        raster_area = int(raster.sum())
        if raster_area == 0:
            continue
        ii = integral_image(raster)
        _, _, r0, c0, r1, c1, scored = best_integer_box(ii, raster_area)
        total_scored += scored
        center_q = np.array([0.5 * (r0 + r1) + off_r, 0.5 * (c0 + c1) + off_c])
        center = rot.T @ center_q
        candidate = canonicalize(OrientedBox(center[0], center[1],
                                             float(c1 - c0), float(r1 - r0),
                                             math.degrees(theta)))
        phi = iou_box_mask(candidate, mask)
        if phi > best_phi:
            best_phi = phi
            best = candidate
    assert best is not None  # non-empty mask always rasterizes at angle 0
    return OracleResult(box=best, phi_value=best_phi, candidates_evaluated=total_scored)
