"""Run-length encoded binary masks and the geometric primitives over them.

Masks are immutable once built: runs are stored as a read-only (n, 3) int64
array of half-open horizontal spans (row, col_start, col_end), sorted
row-major with adjacent spans merged, plus a CSR-style row index so per-row
lookups are O(1).  All geometry uses the pixel-cell model from
:mod:`riou.boxes`: pixel (r, c) is the unit square [r, r+1) x [c, c+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage
from scipy.spatial import ConvexHull

from ._kernels import max_histogram_rectangle
from .boxes import OrientedBox, canonicalize
from .errors import EmptyMaskError, MaskFormatError


@dataclass(frozen=True)
class SegMask:
    """Binary segmentation of one frame.

    Build via :meth:`from_array`, :meth:`from_runs` or :func:`load_mask`;
    the constructor trusts its inputs.
    """

    width: int
    height: int
    runs: np.ndarray = field(repr=False)
    area: int
    row_ptr: np.ndarray = field(repr=False, compare=False)

    @property
    def is_empty(self) -> bool:
        return self.area == 0

    @classmethod
    def from_runs(cls, width: int, height: int, runs) -> "SegMask":
        """Build from raw (row, col_start, col_end) triples.

        Runs are validated against the frame, sorted, and overlapping or
        touching runs on the same row are merged.
        """
        if width <= 0 or height <= 0:
            raise MaskFormatError(f"frame must be positive-sized, got {width}x{height}")
        arr = np.asarray(list(runs) if not isinstance(runs, np.ndarray) else runs, dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 3), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise MaskFormatError("runs must be (row, col_start, col_end) triples")
        if arr.size:
            if (arr[:, 0] < 0).any() or (arr[:, 0] >= height).any():
                raise MaskFormatError("run row out of frame")
            if (arr[:, 1] < 0).any() or (arr[:, 2] > width).any() or (arr[:, 1] >= arr[:, 2]).any():
                raise MaskFormatError("run columns must satisfy 0 <= start < end <= width")
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            merged: list[tuple[int, int, int]] = []
            for r, c0, c1 in arr:
                if merged and merged[-1][0] == r and c0 <= merged[-1][2]:
                    prev = merged[-1]
                    merged[-1] = (prev[0], prev[1], max(prev[2], int(c1)))
                else:
                    merged.append((int(r), int(c0), int(c1)))
            arr = np.array(merged, dtype=np.int64)
        return cls._finish(width, height, arr)

    @classmethod
    def from_array(cls, array) -> "SegMask":
        """Build from a 2D array; any nonzero entry is foreground."""
        a = np.asarray(array)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise MaskFormatError(f"expected a non-empty 2D array, got shape {a.shape}")
        fg = a != 0
        height, width = fg.shape
        padded = np.zeros((height, width + 2), dtype=np.int8)
        padded[:, 1:-1] = fg
        d = np.diff(padded, axis=1)
        rows, starts = np.nonzero(d == 1)
        rows2, ends = np.nonzero(d == -1)
        # starts/ends pair up row by row because every run closes in its row
        arr = np.column_stack([rows, starts, ends]).astype(np.int64)
        return cls._finish(width, height, arr)

    @classmethod
    def _finish(cls, width: int, height: int, arr: np.ndarray) -> "SegMask":
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        area = int((arr[:, 2] - arr[:, 1]).sum()) if arr.size else 0
        counts = np.bincount(arr[:, 0], minlength=height) if arr.size else np.zeros(height, np.int64)
        row_ptr = np.zeros(height + 1, dtype=np.int64)
        np.cumsum(counts, out=row_ptr[1:])
        arr.setflags(write=False)
        row_ptr.setflags(write=False)
        return cls(width=width, height=height, runs=arr, area=area, row_ptr=row_ptr)

    def to_array(self) -> np.ndarray:
        """Rasterize back to a (height, width) bool array."""
        out = np.zeros((self.height, self.width), dtype=bool)
        for r, c0, c1 in self.runs:
            out[r, c0:c1] = True
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SegMask):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.runs, other.runs)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.area, self.runs.tobytes()))


def load_mask(path, foreground_threshold: int = 1) -> SegMask:
    """Load a grayscale or paletted image as a binary mask.

    A pixel is foreground iff its gray value (or palette index) is at least
    ``foreground_threshold``.  PNG and PGM files are supported; palette
    images are read as raw indices, so DAVIS-style masks need no conversion.
    """
    if not 1 <= foreground_threshold <= 255:
        raise ValueError(f"threshold must be in [1, 255], got {foreground_threshold}")
    with Image.open(path) as img:
        if img.mode not in ("1", "L", "P", "I", "I;16"):
            raise MaskFormatError(f"{path}: unsupported image mode {img.mode!r}; expected grayscale or palette")
        values = np.asarray(img)
    if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
        raise MaskFormatError(f"{path}: zero-sized or non-2D image")
    return SegMask.from_array(values >= foreground_threshold)


def _require_nonempty(mask: SegMask) -> None:
    if mask.is_empty:
        raise EmptyMaskError("operation requires a non-empty mask")


def axis_aligned_bbox(mask: SegMask) -> OrientedBox:
    """Tightest axis-aligned box containing every foreground pixel cell."""
    _require_nonempty(mask)
    r0 = float(mask.runs[0, 0])  # runs are row-sorted
    r1 = float(mask.runs[-1, 0] + 1)
    c0 = float(mask.runs[:, 1].min())
    c1 = float(mask.runs[:, 2].max())
    return OrientedBox(0.5 * (r0 + r1), 0.5 * (c0 + c1), c1 - c0, r1 - r0, 0.0)


def _cell_corner_points(mask: SegMask) -> np.ndarray:
    """Corner points of every run's cell span, enough for the convex hull."""
    r = mask.runs[:, 0].astype(np.float64)
    c0 = mask.runs[:, 1].astype(np.float64)
    c1 = mask.runs[:, 2].astype(np.float64)
    pts = np.empty((4 * len(r), 2), dtype=np.float64)
    pts[0::4] = np.column_stack([r, c0])
    pts[1::4] = np.column_stack([r, c1])
    pts[2::4] = np.column_stack([r + 1.0, c0])
    pts[3::4] = np.column_stack([r + 1.0, c1])
    return pts


def oriented_bbox(mask: SegMask) -> OrientedBox:
    """Minimum-area oriented box containing all foreground pixel cells.

    Rotating calipers over the convex hull of the cell corner points: the
    optimal box has a side flush with some hull edge, so it suffices to try
    each edge direction.
    """
    _require_nonempty(mask)
    pts = _cell_corner_points(mask)
    hull = pts[ConvexHull(pts).vertices]
    edges = np.roll(hull, -1, axis=0) - hull
    best_area = math.inf
    best = None
    for dr, dc in edges:
        theta = math.atan2(dr, dc)
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        # rotate hull into the frame where this edge lies along the col axis
        q_r = cos_t * hull[:, 0] - sin_t * hull[:, 1]
        q_c = sin_t * hull[:, 0] + cos_t * hull[:, 1]
        w = q_c.max() - q_c.min()
        h = q_r.max() - q_r.min()
        if w * h < best_area:
            best_area = w * h
            mid_r = 0.5 * (q_r.max() + q_r.min())
            mid_c = 0.5 * (q_c.max() + q_c.min())
            # rotate the center back into frame coordinates
            best = OrientedBox(float(cos_t * mid_r + sin_t * mid_c),
                               float(-sin_t * mid_r + cos_t * mid_c),
                               float(w), float(h), math.degrees(theta))
    return canonicalize(best)


def largest_inner_axis_aligned_box(mask: SegMask) -> OrientedBox:
    """Maximum-area axis-aligned box lying entirely inside the foreground.

    Stack-of-histograms maximal rectangle in O(width * height); ties keep
    the first rectangle in the row-major scan.
    """
    _require_nonempty(mask)
    grid = mask.to_array().astype(np.uint8)
    area, r0, c0, r1, c1 = max_histogram_rectangle(grid)
    assert area > 0
    return OrientedBox(0.5 * (r0 + r1), 0.5 * (c0 + c1), float(c1 - c0), float(r1 - r0), 0.0)


def largest_inner_circle_square(mask: SegMask) -> OrientedBox:
    """Axis-aligned square inscribed in the largest inner circle.

    Distances are exact Euclidean from each foreground cell center to the
    nearest background cell center, with everything outside the frame
    treated as background.  The circle is centered on the max-distance cell
    (first in row-major order on ties) and the square has side r * sqrt(2).
    """
    _require_nonempty(mask)
    padded = np.zeros((mask.height + 2, mask.width + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask.to_array()
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    idx = int(np.argmax(dist))
    r, c = divmod(idx, mask.width)
    radius = float(dist[r, c])
    side = radius * math.sqrt(2.0)
    return OrientedBox(r + 0.5, c + 0.5, side, side, 0.0)


@dataclass(frozen=True)
class MomentsSummary:
    """Centroid and central second-order moments of the foreground cells."""

    centroid_row: float
    centroid_col: float
    cov_rr: float
    cov_cc: float
    cov_rc: float


def moments(mask: SegMask) -> MomentsSummary:
    """First and second central moments over foreground cell centers.

    Closed-form per run: the columns of a run (c0, c1) contribute
    sum (c+0.5) = n(c0+c1)/2 and sum (c+0.5)^2 = S(c1)-S(c0) with
    S(m) = m^3/3 - m/12.
    """
    _require_nonempty(mask)
    r = mask.runs[:, 0].astype(np.float64) + 0.5
    c0 = mask.runs[:, 1].astype(np.float64)
    c1 = mask.runs[:, 2].astype(np.float64)
    n = c1 - c0
    area = float(mask.area)

    col_sum = 0.5 * n * (c0 + c1)
    col_sq = (c1**3 - c0**3) / 3.0 - (c1 - c0) / 12.0
    cr = float((n * r).sum() / area)
    cc = float(col_sum.sum() / area)
    cov_rr = float((n * r * r).sum() / area - cr * cr)
    cov_cc = float(col_sq.sum() / area - cc * cc)
    cov_rc = float((r * col_sum).sum() / area - cr * cc)
    # clamp tiny negative rounding residue on degenerate masks
    return MomentsSummary(cr, cc, max(cov_rr, 0.0), max(cov_cc, 0.0), cov_rc)


def second_moments_box(mask: SegMask) -> OrientedBox:
    """Oriented box whose uniform density matches the mask's second moments.

    A uniform rectangle of side s has variance s^2/12 along that axis, so
    the sides are sqrt(12 * eigenvalue) along the covariance eigenvectors.
    Isotropic covariance falls back to phi = 0; sides are floored at 1 px so
    degenerate (e.g. collinear) masks still yield a valid box.
    """
    m = moments(mask)
    cov = np.array([[m.cov_rr, m.cov_rc], [m.cov_rc, m.cov_cc]])
    evals, evecs = np.linalg.eigh(cov)  # ascending eigenvalues
    lam_minor, lam_major = float(evals[0]), float(evals[1])
    if lam_major - lam_minor <= 1e-12 * max(lam_major, 1.0):
        phi = 0.0
    else:
        vr, vc = evecs[0, 1], evecs[1, 1]
        phi = math.degrees(math.atan2(vr, vc))
    w = max(math.sqrt(12.0 * max(lam_major, 0.0)), 1.0)
    h = max(math.sqrt(12.0 * max(lam_minor, 0.0)), 1.0)
    return canonicalize(OrientedBox(m.centroid_row, m.centroid_col, w, h, phi))
