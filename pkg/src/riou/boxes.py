"""Oriented boxes and the exact IoU primitives built on them.

A box is parameterized by its center (r_c, c_c), its extents (w, h) and an
angle phi in degrees measured from the column axis.  The canonical angle
range is [0, 90): rotating a box by 90 degrees and swapping w and h yields
the identical point set, so every box has a unique canonical form.

Pixel-cell convention: the pixel with integer coordinates (r, c) occupies
the unit square [r, r+1) x [c, c+1) and has center (r+0.5, c+0.5).  Box/mask
overlap is the exact area of the box polygon inside the foreground cells,
which makes the IoU continuous and piecewise-smooth in all five box
parameters (no rasterization anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from ._kernels import box_runs_intersection
from .errors import InvalidBoxError

if TYPE_CHECKING:
    from .masks import SegMask


@dataclass(frozen=True)
class OrientedBox:
    """Rotated rectangle: center (rc, cc), extents (w, h), angle phi in degrees.

    w extends along the direction (sin phi, cos phi) in (row, col) space and
    h along the perpendicular; phi = 0 gives the axis-aligned box with w
    columns wide and h rows tall.  Instances are not automatically canonical;
    use :func:`canonicalize`.
    """

    rc: float
    cc: float
    w: float
    h: float
    phi: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.rc, self.cc, self.w, self.h, self.phi))):
            raise InvalidBoxError(f"non-finite box parameters: {self}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidBoxError(f"box extents must be positive: w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def params(self) -> np.ndarray:
        """The (rc, cc, w, h, phi) parameter vector as float64."""
        return np.array([self.rc, self.cc, self.w, self.h, self.phi], dtype=np.float64)

    @classmethod
    def from_params(cls, params: Iterable[float]) -> "OrientedBox":
        rc, cc, w, h, phi = (float(x) for x in params)
        return cls(rc, cc, w, h, phi)


def canonicalize(box: OrientedBox) -> OrientedBox:
    """Reduce phi into [0, 90), swapping w and h when crossing 90 degrees.

    The returned box covers the identical point set.  Boxes already in
    canonical form are returned unchanged (bit-exact).
    """
    phi = box.phi % 180.0
    if phi == 180.0:  # fmod of a tiny negative angle rounds up to the modulus
        phi = 0.0
    if phi < 90.0:
        if phi == box.phi:
            return box
        return OrientedBox(box.rc, box.cc, box.w, box.h, phi)
    return OrientedBox(box.rc, box.cc, box.h, box.w, phi - 90.0)


def corners(box: OrientedBox) -> np.ndarray:
    """The 4 vertices of the box as a (4, 2) array of (row, col) points.

    Counter-clockwise when col is taken as x and row as y; the shoelace area
    of the result is w * h.
    """
    a = math.radians(box.phi)
    ur, uc = math.sin(a), math.cos(a)  # w axis
    vr, vc = math.cos(a), -math.sin(a)  # h axis
    hw = 0.5 * box.w
    hh = 0.5 * box.h
    rc, cc = box.rc, box.cc
    return np.array(
        [
            [rc - hw * ur - hh * vr, cc - hw * uc - hh * vc],
            [rc + hw * ur - hh * vr, cc + hw * uc - hh * vc],
            [rc + hw * ur + hh * vr, cc + hw * uc + hh * vc],
            [rc - hw * ur + hh * vr, cc - hw * uc + hh * vc],
        ],
        dtype=np.float64,
    )


def mask_intersection_area(box: OrientedBox, mask: "SegMask") -> float:
    """Exact area of box-polygon overlap with the mask's foreground cells.

    The box may extend beyond the frame; only in-frame foreground
    contributes.  Returns 0.0 for empty masks.
    """
    if mask.area == 0:
        return 0.0
    raw = box_runs_intersection(corners(box), mask.runs, mask.row_ptr, mask.height)
    # guard against float rounding pushing past the hard bounds
    return min(max(raw, 0.0), float(mask.area), box.area)


def iou_box_mask(box: OrientedBox, mask: "SegMask") -> float:
    """Intersection over union between a box and a segmentation mask.

    The union uses the continuous box area w * h (the box is never clipped
    to the frame).  Empty masks score 0 by convention.
    """
    if mask.area == 0:
        return 0.0
    inter = mask_intersection_area(box, mask)
    # grouped so that full containment yields exactly area / (w * h)
    union = (mask.area - inter) + box.area
    return inter / union


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a polygon against a convex CCW polygon."""
    output = [(float(p[0]), float(p[1])) for p in subject]
    n = len(clip)
    for i in range(n):
        if not output:
            break
        ar, ac = clip[i]
        br, bc = clip[(i + 1) % n]
        # inside = left of the directed edge with col as x, row as y
        er, ec = br - ar, bc - ac
        points = output
        output = []
        sr, sc = points[-1]
        s_in = ec * (sr - ar) - er * (sc - ac) >= 0.0
        for pr, pc in points:
            p_in = ec * (pr - ar) - er * (pc - ac) >= 0.0
            if p_in != s_in:
                dr, dc = pr - sr, pc - sc
                denom = ec * dr - er * dc
                if denom != 0.0:  # parallel edge: side flip is float noise
                    t = (er * (sc - ac) - ec * (sr - ar)) / denom
                    output.append((sr + t * dr, sc + t * dc))
            if p_in:
                output.append((pr, pc))
            sr, sc, s_in = pr, pc, p_in
    return output


def _shoelace_area(points: list[tuple[float, float]]) -> float:
    n = len(points)
    if n < 3:
        return 0.0
    s = 0.0
    for i in range(n):
        r0, c0 = points[i]
        r1, c1 = points[(i + 1) % n]
        s += c0 * r1 - c1 * r0
    return 0.5 * abs(s)


def iou_box_box(a: OrientedBox, b: OrientedBox) -> float:
    """Exact IoU of two oriented boxes via convex polygon clipping.

    The operands are ordered internally so the result is bit-identical
    under argument swap.
    """
    ka = (a.rc, a.cc, a.w, a.h, a.phi)
    kb = (b.rc, b.cc, b.w, b.h, b.phi)
    if kb < ka:
        a, b = b, a
    inter = _shoelace_area(_clip_polygon(corners(a), corners(b)))
    inter = min(inter, a.area, b.area)
    union = a.area + b.area - inter
    return inter / union


def format_box_line(box: OrientedBox) -> str:
    """One-line text form `r_c c_c w h phi_deg` with round-trip precision."""
    return " ".join(
        format(v, ".17g") for v in (box.rc, box.cc, box.w, box.h, box.phi)
    )


def parse_box_line(line: str) -> OrientedBox:
    """Parse the box text format; raises ValueError on malformed input."""
    parts = line.split()
    if len(parts) != 5:
        raise ValueError(f"expected 5 fields `r_c c_c w h phi_deg`, got {len(parts)}")
    return OrientedBox(*(float(p) for p in parts))
