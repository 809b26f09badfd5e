"""Best-box search: multi-start gradient ascent on the box/mask IoU.

The objective is exact fractional coverage (see :mod:`riou.boxes`), so
central finite differences give usable gradients everywhere except at flat
regions far from the mask.  Each start runs a backtracking (Armijo) line
search along the numeric gradient; if the starts disagree, extra starts are
sampled from the parameter intervals spanned by the distinct optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .boxes import OrientedBox, canonicalize, iou_box_mask
from .errors import EmptyMaskError
from .masks import (
    SegMask,
    axis_aligned_bbox,
    largest_inner_axis_aligned_box,
    largest_inner_circle_square,
    oriented_bbox,
    second_moments_box,
)

SIZE_FLOOR = 0.5  # px; keeps iterates strictly inside the feasible set

_AXIS_ALIGNED = "aa"
_ORIENTED = "rot"
_FIXED_SCALE = "noscale"


@dataclass(frozen=True)
class BoxFamily:
    """The search family: axis-aligned, oriented, or fixed-scale axis-aligned.

    kind is one of "aa" (phi frozen at 0), "rot" (all 5 parameters free) or
    "noscale" (phi frozen at 0 and w, h frozen at fixed_w, fixed_h).  A
    noscale family may be created without a scale; it must then be frozen
    (e.g. from a first-frame optimum) before it can be searched.
    """

    kind: str
    fixed_w: float | None = None
    fixed_h: float | None = None

    def __post_init__(self):
        if self.kind not in (_AXIS_ALIGNED, _ORIENTED, _FIXED_SCALE):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == _FIXED_SCALE:
            given = (self.fixed_w is not None, self.fixed_h is not None)
            if given == (True, True):
                if self.fixed_w <= 0 or self.fixed_h <= 0:
                    raise ValueError("fixed scale must be positive")
            elif given != (False, False):
                raise ValueError("set both fixed_w and fixed_h, or neither")
        elif self.fixed_w is not None or self.fixed_h is not None:
            raise ValueError(f"fixed scale is only meaningful for noscale, not {self.kind!r}")

    @classmethod
    def axis_aligned(cls) -> "BoxFamily":
        return cls(_AXIS_ALIGNED)

    @classmethod
    def oriented(cls) -> "BoxFamily":
        return cls(_ORIENTED)

    @classmethod
    def fixed_scale(cls, w: float | None = None, h: float | None = None) -> "BoxFamily":
        return cls(_FIXED_SCALE,
                   fixed_w=None if w is None else float(w),
                   fixed_h=None if h is None else float(h))

    @property
    def scale_pending(self) -> bool:
        return self.kind == _FIXED_SCALE and self.fixed_w is None

    def _require_scale(self) -> None:
        if self.scale_pending:
            raise ValueError("noscale family has no scale yet; freeze one first")

    @property
    def free_mask(self) -> np.ndarray:
        """Boolean mask over (rc, cc, w, h, phi) marking free parameters."""
        if self.kind == _ORIENTED:
            return np.array([True, True, True, True, True])
        if self.kind == _AXIS_ALIGNED:
            return np.array([True, True, True, True, False])
        self._require_scale()
        return np.array([True, True, False, False, False])

    def project(self, box: OrientedBox) -> OrientedBox:
        """Force the family's frozen parameters, keeping the box center."""
        box = canonicalize(box)
        if self.kind == _ORIENTED:
            return box
        if self.kind == _AXIS_ALIGNED:
            return OrientedBox(box.rc, box.cc, box.w, box.h, 0.0)
        self._require_scale()
        return OrientedBox(box.rc, box.cc, self.fixed_w, self.fixed_h, 0.0)


@dataclass(frozen=True)
class OptimizerConfig:
    """Tunables for the multi-start ascent; defaults work for all families."""

    grad_step_pos: float = 0.1  # px, central-difference delta for rc, cc
    grad_step_size: float = 0.1  # px, for w, h
    grad_step_angle: float = 0.1  # degrees, for phi
    armijo_c: float = 1e-4
    backtrack_rho: float = 0.5
    initial_step: float = 1.0  # px/deg moved by the largest gradient component
    max_iters: int = 200  # per start
    convergence_tol: float = 1e-6  # stop when an accepted step improves less
    restart_samples: int = 50
    optima_cluster_tol: float = 1e-4  # IoU distance for "same optimum"
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("grad_step_pos", "grad_step_size", "grad_step_angle",
                     "armijo_c", "initial_step", "convergence_tol", "optima_cluster_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.backtrack_rho < 1.0:
            raise ValueError("backtrack_rho must be in (0, 1)")
        if self.restart_samples < 0:
            raise ValueError("restart_samples must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_step_size >= SIZE_FLOOR:
            raise ValueError(f"grad_step_size must stay below the {SIZE_FLOOR} px size floor")

    @classmethod
    def from_file(cls, path) -> "OptimizerConfig":
        """Read a flat `key = value` config file (# starts a comment)."""
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_text(cls, text: str) -> "OptimizerConfig":
        int_fields = {"max_iters", "restart_samples", "rng_seed"}
        values: dict[str, float | int] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected `key = value`, got {raw!r}")
            key, _, val = (part.strip() for part in line.partition("="))
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            values[key] = int(val) if key in int_fields else float(val)
        return cls(**values)


@dataclass(frozen=True)
class OptResult:
    """Outcome of one optimization: the box, its IoU, and diagnostics."""

    box: OrientedBox
    phi_opt: float
    starts_used: int
    iterations_total: int
    converged: bool
    distinct_optima: int


_GRAD_CLASS = ("pos", "pos", "size", "size", "angle")


def _deltas(config: OptimizerConfig) -> np.ndarray:
    lookup = {"pos": config.grad_step_pos, "size": config.grad_step_size,
              "angle": config.grad_step_angle}
    return np.array([lookup[c] for c in _GRAD_CLASS])


def seed_boxes(mask: SegMask, family: BoxFamily) -> list[OrientedBox]:
    """The five construction-based starting boxes, projected into the family.

    The two bounding boxes shrink during ascent, the two inner boxes grow,
    and the second-moments box starts in between.  Seeds closer than 1e-6 in
    every parameter are deduplicated (first occurrence kept).
    """
    if mask.is_empty:
        raise EmptyMaskError("cannot seed an empty mask")
    raw = [
        axis_aligned_bbox(mask),
        oriented_bbox(mask),
        largest_inner_axis_aligned_box(mask),
        largest_inner_circle_square(mask),
        second_moments_box(mask),
    ]
    seeds: list[OrientedBox] = []
    for box in raw:
        projected = family.project(_floor_sizes(box.params()))
        if not any(np.abs(projected.params() - s.params()).max() < 1e-6 for s in seeds):
            seeds.append(projected)
    return seeds


def _floor_sizes(params: np.ndarray) -> OrientedBox:
    p = params.copy()
    p[2] = max(p[2], SIZE_FLOOR)
    p[3] = max(p[3], SIZE_FLOOR)
    return OrientedBox.from_params(p)


def numeric_gradient(mask: SegMask, box: OrientedBox, family: BoxFamily,
                     config: OptimizerConfig = OptimizerConfig()) -> np.ndarray:
    """Central-difference IoU gradient over the family's free parameters.

    Returns a 5-vector with zeros at frozen parameters.  Probe boxes are not
    canonicalized: the IoU is invariant under the 90-degree reduction, so
    evaluating the raw parameters is equivalent.
    """
    deltas = _deltas(config)
    free = family.free_mask
    params = box.params()
    grad = np.zeros(5)
    for i in range(5):
        if not free[i]:
            continue
        d = deltas[i]
        hi = params.copy()
        hi[i] += d
        lo = params.copy()
        lo[i] -= d
        if i in (2, 3) and lo[i] <= 0:
            lo[i] = min(params[i], 1e-3)  # keep probe boxes valid near the floor
            d = 0.5 * (hi[i] - lo[i])
        grad[i] = (iou_box_mask(OrientedBox.from_params(hi), mask)
                   - iou_box_mask(OrientedBox.from_params(lo), mask)) / (2.0 * d)
    return grad


_MIN_DELTA_SCALE = 1.0 / 256.0  # finest probe resolution relative to config deltas
_UNIT = np.eye(5)


def _integer_edge_snap(box: OrientedBox) -> OrientedBox | None:
    """The box with edges snapped to the pixel grid, when nearly axis-aligned.

    Coverage kinks sit exactly on integer cell boundaries, so ascent often
    terminates within a probe step of an integer-edged box; evaluating the
    snapped candidate closes that last gap.  Returns None when the box is
    genuinely oriented or snapping would collapse a side.
    """
    if box.phi <= 0.01:
        w_cols, h_rows = box.w, box.h
    elif box.phi >= 89.99:
        w_cols, h_rows = box.h, box.w
    else:
        return None
    top = round(box.rc - 0.5 * h_rows)
    bottom = round(box.rc + 0.5 * h_rows)
    left = round(box.cc - 0.5 * w_cols)
    right = round(box.cc + 0.5 * w_cols)
    if bottom <= top or right <= left:
        return None
    return OrientedBox(0.5 * (top + bottom), 0.5 * (left + right),
                       float(right - left), float(bottom - top), 0.0)


def _edge_steps(deltas: np.ndarray, phi_deg: float, free: list[int]) -> list[np.ndarray]:
    """Candidate steps that move one box edge in or out by the size delta."""
    a = math.radians(phi_deg)
    axes = {2: (math.sin(a), math.cos(a)), 3: (math.cos(a), -math.sin(a))}
    steps = []
    for i, (ar, ac) in axes.items():
        if i not in free:
            continue
        d = deltas[i]
        for edge in (1.0, -1.0):
            for io in (1.0, -1.0):
                vec = np.zeros(5)
                vec[i] = io * d
                vec[0] = edge * io * 0.5 * d * ar
                vec[1] = edge * io * 0.5 * d * ac
                steps.append(vec)
    return steps


def ascend_from(mask: SegMask, seed: OrientedBox, family: BoxFamily,
                config: OptimizerConfig = OptimizerConfig()) -> OptResult:
    """Single-start gradient ascent with a backtracking line search.

    Each iteration probes phi at b +- delta_i e_i, forms the symmetric
    difference gradient g and tries steps b + t*g, with t scaled so the
    first trial moves the largest component by ``initial_step`` and halved
    until the Armijo condition phi(trial) >= phi(b) + armijo_c * t * ||g||^2
    holds.  The exact-coverage objective is only piecewise smooth, and its
    optima sit on kinks where the averaged gradient can point downhill even
    though an ascent direction exists; when the line search fails, the best
    improving axis probe is taken instead (extended greedily while it keeps
    helping).  When nothing improves at the current resolution the probe
    deltas shrink (down to 1/256 of the configured ones) before the start
    is declared converged, so convergence means no improving probe at the
    finest resolution.  Accepted iterates are canonicalized and
    size-floored before evaluation: the IoU trace is nondecreasing by
    construction.
    """
    if mask.is_empty:
        raise EmptyMaskError("cannot optimize over an empty mask")
    box = family.project(seed)
    phi = iou_box_mask(box, mask)
    free = [i for i in range(5) if family.free_mask[i]]
    base_deltas = _deltas(config)
    scale = 1.0
    iterations = 0
    converged = False
    while iterations < config.max_iters:
        params = box.params()
        deltas = base_deltas * scale
        probes = {}
        grad = np.zeros(5)
        for i in free:
            lo_phi, hi_phi = None, None
            for sign in (-1.0, 1.0):
                p = params.copy()
                p[i] += sign * deltas[i]
                if i in (2, 3):
                    p[i] = max(p[i], 1e-3)  # keep probe boxes valid
                val = iou_box_mask(OrientedBox.from_params(p), mask)
                probes[(i, sign)] = (p, val)
                if sign < 0:
                    lo_phi = val
                else:
                    hi_phi = val
            grad[i] = (hi_phi - lo_phi) / (2.0 * deltas[i])

        accepted = None
        gmax = float(np.abs(grad).max())
        if gmax > 0.0:
            gnorm2 = float(grad @ grad)
            t0 = config.initial_step / gmax  # first trial moves max component by initial_step
            t = t0
            while t * gmax >= 1e-8:  # cut off once the trial movement is sub-1e-8 px/deg
                trial = canonicalize(_floor_sizes(params + t * grad))
                trial_phi = iou_box_mask(trial, mask)
                if trial_phi > phi and trial_phi >= phi + config.armijo_c * t * gnorm2:
                    accepted = (trial, trial_phi)
                    break
                t *= config.backtrack_rho
            if accepted is not None and t == t0:
                # the full step was good: expand while the gain keeps growing
                while True:
                    t *= 2.0
                    trial = canonicalize(_floor_sizes(params + t * grad))
                    trial_phi = iou_box_mask(trial, mask)
                    if trial_phi <= accepted[1] or trial_phi < phi + config.armijo_c * t * gnorm2:
                        break
                    accepted = (trial, trial_phi)

        if accepted is None:
            # Kink fallback: the averaged gradient points downhill, but a
            # single-axis or single-edge move may still improve.  Edge moves
            # (one side of the box in or out, i.e. joint center/extent
            # steps) are the natural directions at mask-boundary kinks.
            steps = [sign * deltas[i] * _UNIT[i] for (i, sign) in probes]
            steps += _edge_steps(deltas, params[4], free)
            best_step = None
            best_phi = phi
            for vec in steps:
                cand = canonicalize(_floor_sizes(params + vec))
                cand_phi = iou_box_mask(cand, mask)
                if cand_phi > best_phi:
                    best_step, best_phi, best_box = vec, cand_phi, cand
            if best_step is not None:
                factor = 2.0
                while True:  # extend greedily while doubling keeps helping
                    ext = canonicalize(_floor_sizes(params + factor * best_step))
                    ext_phi = iou_box_mask(ext, mask)
                    if ext_phi <= best_phi:
                        break
                    best_box, best_phi = ext, ext_phi
                    factor *= 2.0
                accepted = (best_box, best_phi)

        if accepted is not None:
            improvement = accepted[1] - phi
            box, phi = accepted
            iterations += 1
            # at the finest resolution run to stationarity; at coarser ones a
            # sub-tolerance improvement is the cue to refine the resolution
            if improvement >= config.convergence_tol or scale <= _MIN_DELTA_SCALE:
                continue
        if scale <= _MIN_DELTA_SCALE:
            converged = True
            break
        scale *= 0.25
    if family.kind != _FIXED_SCALE:  # snapping would alter the frozen scale
        snapped = _integer_edge_snap(box)
        if snapped is not None:
            snapped_phi = iou_box_mask(snapped, mask)
            if snapped_phi >= phi:
                box, phi = snapped, snapped_phi
    return OptResult(box=box, phi_opt=phi, starts_used=1,
                     iterations_total=iterations, converged=converged,
                     distinct_optima=1)


def _cluster_by_phi(results: Sequence[OptResult], tol: float) -> list[OptResult]:
    """Representatives (best first) of IoU-value clusters among results."""
    ordered = sorted(range(len(results)), key=lambda i: (-results[i].phi_opt, i))
    reps: list[OptResult] = []
    for i in ordered:
        if all(abs(results[i].phi_opt - rep.phi_opt) > tol for rep in reps):
            reps.append(results[i])
    return reps


def optimize(mask: SegMask, family: BoxFamily,
             config: OptimizerConfig = OptimizerConfig(),
             extra_seeds: Sequence[OrientedBox] = ()) -> OptResult:
    """Best box of the family for this mask: the full multi-start search.

    Ascends from every construction seed (plus any ``extra_seeds``, e.g. a
    warm start); when the resulting optima differ by more than the cluster
    tolerance, ``restart_samples`` further starts are drawn uniformly from
    the per-parameter intervals spanned by the distinct optima, widened by
    10% of each interval (at least +-0.5 px / +-0.5 deg).  Deterministic for
    a fixed config including the RNG seed.

    The oriented search additionally seeds itself with the axis-aligned
    optimum: the families are nested, so ascending from the smaller
    family's result guarantees the larger family never scores worse.
    """
    base = None
    if family.kind == _ORIENTED:
        base = optimize(mask, BoxFamily.axis_aligned(), config)
        extra_seeds = tuple(extra_seeds) + (base.box,)
    seeds = seed_boxes(mask, family)
    for extra in extra_seeds:
        projected = family.project(_floor_sizes(extra.params()))
        if not any(np.abs(projected.params() - s.params()).max() < 1e-6 for s in seeds):
            seeds.append(projected)
    results = [ascend_from(mask, seed, family, config) for seed in seeds]

    reps = _cluster_by_phi(results, config.optima_cluster_tol)
    if len(reps) > 1 and config.restart_samples > 0:
        rng = np.random.default_rng(config.rng_seed)
        rep_params = np.array([r.box.params() for r in reps])
        lo = rep_params.min(axis=0)
        hi = rep_params.max(axis=0)
        pad = np.maximum(0.1 * (hi - lo), 0.5)
        lo, hi = lo - pad, hi + pad
        free = family.free_mask
        for _ in range(config.restart_samples):
            draw = rng.uniform(lo, hi)
            params = results[0].box.params()
            params[free] = draw[free]
            start = canonicalize(_floor_sizes(params))
            results.append(ascend_from(mask, start, family, config))

    best = max(range(len(results)), key=lambda i: (results[i].phi_opt, -i))
    clusters = _cluster_by_phi(results, config.optima_cluster_tol)
    return replace(
        results[best],
        starts_used=len(results) + (base.starts_used if base else 0),
        iterations_total=(sum(r.iterations_total for r in results)
                          + (base.iterations_total if base else 0)),
        distinct_optima=len(clusters),
    )
