"""Validate the gradient optimizer against exhaustive search.

The optimizer is a heuristic multi-start ascent, so we check it the hard
way: enumerate every axis-aligned box with integer cell boundaries (an
integral image makes each candidate O(1)) and compare.  Because the
optimizer works with sub-pixel boundaries it may legitimately beat the
integer search; it should never fall meaningfully below it.

Run:  python demos/02_validating_against_exhaustive_search.py
"""

import time

from riou import BoxFamily, optimize
from riou.oracle import exhaustive_axis_aligned, grid_oriented
from riou.synthetic import rotated_rectangle_mask, synthetic_suite

masks = synthetic_suite(seed=20, count=12, min_size=48, max_size=96)

print("optimizer vs exhaustive integer search (axis-aligned):")
print(f"{'mask':>4s} {'size':>9s} {'oracle':>9s} {'optimizer':>9s} {'delta':>10s} {'cand.':>12s}")
t0 = time.perf_counter()
worst = 0.0
for i, mask in enumerate(masks):
    oracle = exhaustive_axis_aligned(mask)
    res = optimize(mask, BoxFamily.axis_aligned())
    delta = res.phi_opt - oracle.phi_value
    worst = min(worst, delta)
    print(f"{i:4d} {mask.width:4d}x{mask.height:<4d} {oracle.phi_value:9.6f} "
          f"{res.phi_opt:9.6f} {delta:+10.6f} {oracle.candidates_evaluated:12d}")
print(f"worst delta {worst:+.6f} over {len(masks)} masks "
      f"({time.perf_counter() - t0:.1f}s total)")

# -- oriented boxes: the pixel/angle grid cannot beat sub-pixel ascent -----
mask = rotated_rectangle_mask(96, 96, (48, 48), 56, 24, 37.0)
res = optimize(mask, BoxFamily.oriented())
grid = grid_oriented(mask, angle_step=0.5)
print("\noriented box on a 37-degree rectangle:")
print(f"  optimizer    phi {res.phi_opt:.6f} at {res.box.phi:.3f} deg")
print(f"  0.5-deg grid phi {grid.phi_value:.6f} at {grid.box.phi:.1f} deg "
      f"({grid.candidates_evaluated} candidates)")
print("  sub-degree angle precision is exactly what the grid search lacks.")
