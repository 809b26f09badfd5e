"""Compiled inner loops: box/mask coverage and integer-box enumeration.

Everything here is deterministic and single-threaded; callers own all
tie-breaking and ordering guarantees.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _clip_axis(poly_in, n_in, poly_out, axis, bound, keep_low):
    """Clip a convex polygon against an axis-parallel half-plane.

    Keeps coord <= bound when keep_low, else coord >= bound.  Returns the
    number of vertices written to poly_out (orientation is preserved).
    """
    m = 0
    for i in range(n_in):
        j = i + 1
        if j == n_in:
            j = 0
        a0 = poly_in[i, axis]
        a1 = poly_in[j, axis]
        if keep_low:
            in0 = a0 <= bound
            in1 = a1 <= bound
        else:
            in0 = a0 >= bound
            in1 = a1 >= bound
        if in0:
            poly_out[m, 0] = poly_in[i, 0]
            poly_out[m, 1] = poly_in[i, 1]
            m += 1
        if in0 != in1:
            t = (bound - a0) / (a1 - a0)
            poly_out[m, 0] = poly_in[i, 0] + t * (poly_in[j, 0] - poly_in[i, 0])
            poly_out[m, 1] = poly_in[i, 1] + t * (poly_in[j, 1] - poly_in[i, 1])
            m += 1
    return m


@njit(cache=True)
def _shoelace(poly, n):
    s = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        # vertices are (row, col); treat col as x and row as y
        s += poly[i, 1] * poly[j, 0] - poly[j, 1] * poly[i, 0]
    return 0.5 * abs(s)


@njit(cache=True)
def box_runs_intersection(corners, runs, row_ptr, height):
    """Exact area of overlap between a convex quadrilateral and an RLE mask.

    corners: (4, 2) float64 vertices in (row, col) order, consistently wound.
    runs: (n, 3) int64 half-open foreground runs (row, col_start, col_end).
    row_ptr: (height + 1,) int64 CSR index so runs of row r are
    runs[row_ptr[r]:row_ptr[r + 1]].

    The quadrilateral is clipped to each unit row slab, then per run to the
    run's column interval; the clipped polygon areas accumulate.  This is
    exact up to float rounding, so the result is continuous in the corner
    coordinates.
    """
    rmin = corners[0, 0]
    rmax = corners[0, 0]
    for i in range(1, 4):
        if corners[i, 0] < rmin:
            rmin = corners[i, 0]
        if corners[i, 0] > rmax:
            rmax = corners[i, 0]
    r_lo = int(np.floor(rmin))
    if r_lo < 0:
        r_lo = 0
    r_hi = int(np.ceil(rmax))
    if r_hi > height:
        r_hi = height

    buf_a = np.empty((10, 2), dtype=np.float64)
    slab = np.empty((10, 2), dtype=np.float64)
    buf_b = np.empty((10, 2), dtype=np.float64)
    cell = np.empty((10, 2), dtype=np.float64)

    total = 0.0
    for r in range(r_lo, r_hi):
        k0 = row_ptr[r]
        k1 = row_ptr[r + 1]
        if k0 == k1:
            continue
        n1 = _clip_axis(corners, 4, buf_a, 0, float(r), False)
        if n1 < 3:
            continue
        n2 = _clip_axis(buf_a, n1, slab, 0, float(r + 1), True)
        if n2 < 3:
            continue
        cmin = slab[0, 1]
        cmax = slab[0, 1]
        for i in range(1, n2):
            if slab[i, 1] < cmin:
                cmin = slab[i, 1]
            if slab[i, 1] > cmax:
                cmax = slab[i, 1]
        for k in range(k0, k1):
            c0 = float(runs[k, 1])
            c1 = float(runs[k, 2])
            if c0 >= cmax:
                break  # runs are sorted by col_start within a row
            if c1 <= cmin:
                continue
            n3 = _clip_axis(slab, n2, buf_b, 1, c0, False)
            if n3 < 3:
                continue
            n4 = _clip_axis(buf_b, n3, cell, 1, c1, True)
            if n4 >= 3:
                total += _shoelace(cell, n4)
    return total


@njit(cache=True)
def max_histogram_rectangle(grid):
    """Largest all-foreground axis-aligned rectangle of a 0/1 grid.

    Stack-of-histograms scan, O(height * width).  Returns
    (area, r0, c0, r1, c1) with half-open bounds; ties keep the rectangle
    found first while scanning bottom rows top-to-bottom and columns
    left-to-right.
    """
    height, width = grid.shape
    heights = np.zeros(width + 1, dtype=np.int64)  # sentinel column at the end
    stack = np.empty(width + 1, dtype=np.int64)
    best_area = 0
    best = (0, 0, 0, 0)
    for r in range(height):
        for c in range(width):
            if grid[r, c] != 0:
                heights[c] += 1
            else:
                heights[c] = 0
        top = -1
        c = 0
        while c <= width:
            while top >= 0 and heights[stack[top]] > heights[c]:
                h = heights[stack[top]]
                top -= 1
                left = stack[top] + 1 if top >= 0 else 0
                area = h * (c - left)
                if area > best_area:
                    best_area = area
                    best = (r + 1 - h, left, r + 1, c)
            top += 1
            stack[top] = c
            c += 1
    return best_area, best[0], best[1], best[2], best[3]


@njit(cache=True)
def best_integer_box(ii, mask_area):
    """Maximum-IoU integer-boundary box against an integral image.

    ii: (H + 1, W + 1) int64 integral image of the 0/1 mask raster;
    mask_area: total foreground count.  All boxes 0 <= r0 < r1 <= H,
    0 <= c0 < c1 <= W are candidates, enumerated in (r0, c0, r1, c1)
    lexicographic order; only a strictly better IoU replaces the incumbent,
    so ties keep the first candidate in that order.  IoU comparisons are
    exact integer cross-products; branches are pruned only via the bound
    IoU <= intersection_upper / mask_area, which cannot discard a winner.

    Returns (best_i, best_u, r0, c0, r1, c1, candidates_scored).
    """
    h1 = ii.shape[0]
    w1 = ii.shape[1]
    height = h1 - 1
    width = w1 - 1
    best_i = 0
    best_u = 1
    br0, bc0, br1, bc1 = 0, 0, 1, 1
    scored = 0
    for r0 in range(height):
        # mass strictly below r0: once too small to beat the incumbent, stop
        rest = mask_area - (ii[r0, width] - ii[0, width])
        if rest * best_u <= best_i * mask_area:
            break
        for c0 in range(width):
            # mass right of c0 within rows >= r0
            tail = (ii[height, width] - ii[height, c0]) - (ii[r0, width] - ii[r0, c0])
            if tail * best_u <= best_i * mask_area:
                break
            for r1 in range(r0 + 1, height + 1):
                band = (ii[r1, width] - ii[r1, c0]) - (ii[r0, width] - ii[r0, c0])
                if band * best_u <= best_i * mask_area:
                    continue
                row_off = (r1 - r0)
                base = ii[r1, c0] - ii[r0, c0]
                for c1 in range(c0 + 1, width + 1):
                    inter = ii[r1, c1] - ii[r0, c1] - base
                    union = mask_area + row_off * (c1 - c0) - inter
                    scored += 1
                    if inter * best_u > best_i * union:
                        best_i = inter
                        best_u = union
                        br0, bc0, br1, bc1 = r0, c0, r1, c1
    return best_i, best_u, br0, bc0, br1, bc1, scored
