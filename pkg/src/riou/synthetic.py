"""Synthetic masks and sequences for validation, benchmarks, and demos."""

from __future__ import annotations

import math

import numpy as np

from .masks import SegMask


def rectangle_mask(width: int, height: int, r0: int, c0: int,
                   rect_h: int, rect_w: int) -> SegMask:
    """Axis-aligned filled rectangle with integer cell bounds."""
    grid = np.zeros((height, width), dtype=bool)
    grid[r0:r0 + rect_h, c0:c0 + rect_w] = True
    return SegMask.from_array(grid)


def rotated_rectangle_mask(width: int, height: int, center: tuple[float, float],
                           rect_w: float, rect_h: float, angle_deg: float) -> SegMask:
    """Rasterized rotated rectangle: a cell is foreground iff its center
    lies inside the analytic rectangle."""
    a = math.radians(angle_deg)
    ur, uc = math.sin(a), math.cos(a)
    vr, vc = math.cos(a), -math.sin(a)
    rr, cc = np.meshgrid(np.arange(height) + 0.5, np.arange(width) + 0.5, indexing="ij")
    dr = rr - center[0]
    dc = cc - center[1]
    inside = (np.abs(dr * ur + dc * uc) <= rect_w / 2.0) & (np.abs(dr * vr + dc * vc) <= rect_h / 2.0)
    return SegMask.from_array(inside)


def disk_mask(width: int, height: int, center: tuple[float, float], radius: float) -> SegMask:
    """Rasterized disk (cell centers inside the analytic circle)."""
    rr, cc = np.meshgrid(np.arange(height) + 0.5, np.arange(width) + 0.5, indexing="ij")
    inside = (rr - center[0]) ** 2 + (cc - center[1]) ** 2 <= radius**2
    return SegMask.from_array(inside)


def ellipse_mask(width: int, height: int, center: tuple[float, float],
                 semi_r: float, semi_c: float) -> SegMask:
    rr, cc = np.meshgrid(np.arange(height) + 0.5, np.arange(width) + 0.5, indexing="ij")
    inside = ((rr - center[0]) / semi_r) ** 2 + ((cc - center[1]) / semi_c) ** 2 <= 1.0
    return SegMask.from_array(inside)


def ring_mask(width: int, height: int, r0: int, c0: int, outer: int, thickness: int) -> SegMask:
    """Square annulus: an outer x outer block with the interior removed."""
    grid = np.zeros((height, width), dtype=bool)
    grid[r0:r0 + outer, c0:c0 + outer] = True
    t = thickness
    grid[r0 + t:r0 + outer - t, c0 + t:c0 + outer - t] = False
    return SegMask.from_array(grid)


def random_shape_union_mask(rng: np.random.Generator, min_size: int = 64,
                            max_size: int = 128, max_shapes: int = 3) -> SegMask:
    """Union of 1..max_shapes random rectangles and ellipses.

    Frames are square with side uniform in [min_size, max_size].  Retries
    internally until the union has a reasonable area, so the result is never
    empty.
    """
    while True:
        side = int(rng.integers(min_size, max_size + 1))
        grid = np.zeros((side, side), dtype=bool)
        n_shapes = int(rng.integers(1, max_shapes + 1))
        for _ in range(n_shapes):
            kind = rng.integers(0, 2)
            if kind == 0:
                h = int(rng.integers(side // 8, side // 2))
                w = int(rng.integers(side // 8, side // 2))
                r0 = int(rng.integers(0, side - h))
                c0 = int(rng.integers(0, side - w))
                grid[r0:r0 + h, c0:c0 + w] = True
            else:
                sr = float(rng.uniform(side / 16, side / 4))
                sc = float(rng.uniform(side / 16, side / 4))
                cr = float(rng.uniform(sr, side - sr))
                ccol = float(rng.uniform(sc, side - sc))
                rr, cc = np.meshgrid(np.arange(side) + 0.5, np.arange(side) + 0.5, indexing="ij")
                grid |= ((rr - cr) / sr) ** 2 + ((cc - ccol) / sc) ** 2 <= 1.0
        if grid.sum() >= 16:
            return SegMask.from_array(grid)


def synthetic_suite(seed: int = 7041776, count: int = 50, min_size: int = 64,
                    max_size: int = 128) -> list[SegMask]:
    """The fixed-seed validation suite of random shape unions."""
    rng = np.random.default_rng(seed)
    return [random_shape_union_mask(rng, min_size, max_size) for _ in range(count)]


def growing_rectangle_frames(count: int = 10, width: int = 128, height: int = 128,
                             start_w: int = 20, start_h: int = 14,
                             growth: float = 1.1) -> list[SegMask]:
    """Centered rectangle growing ~10% per frame (strictly, after rounding)."""
    frames = []
    prev_w, prev_h = 0, 0
    w, h = float(start_w), float(start_h)
    for _ in range(count):
        rw = max(int(round(w)), prev_w + 1)  # keep growth strict despite rounding
        rh = max(int(round(h)), prev_h + 1)
        r0 = (height - rh) // 2
        c0 = (width - rw) // 2
        frames.append(rectangle_mask(width, height, r0, c0, rh, rw))
        prev_w, prev_h = rw, rh
        w *= growth
        h *= growth
    return frames


def rotating_rectangle_frames(angles_deg=(15, 25, 35, 45, 55, 65, 75),
                              width: int = 128, height: int = 128,
                              rect_w: float = 44.0, rect_h: float = 14.0) -> list[SegMask]:
    """Centered rectangle rotating through the given angles, one per frame."""
    center = (height / 2.0, width / 2.0)
    return [rotated_rectangle_mask(width, height, center, rect_w, rect_h, a)
            for a in angles_deg]
