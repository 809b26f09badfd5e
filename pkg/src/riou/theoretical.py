"""Per-sequence upper-bound "trackers": the optimal box of each family.

Frames are optimized independently, so a sequence's optimal-IoU curve is a
property of the ground truth alone.  Comparing the three families' curves
exposes what happens in the scene: a widening gap between the fixed-scale
curve and the others means the object changes scale, a gap between the
oriented and axis-aligned curves means it rotates, and a dip in all three
means occlusion or a shape boxes cannot capture.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyFirstFrameError, EmptySequenceError
from .masks import SegMask, load_mask
from .optimize import BoxFamily, OptimizerConfig, OptResult, optimize

MASK_SUFFIXES = (".png", ".pgm")


@dataclass(frozen=True)
class MaskSequence:
    """Ordered frames of one object's segmentation, uniform frame size."""

    name: str
    frames: tuple[SegMask, ...]

    def __post_init__(self):
        if not self.frames:
            raise EmptySequenceError(f"sequence {self.name!r} has no frames")
        w, h = self.frames[0].width, self.frames[0].height
        for i, f in enumerate(self.frames):
            if (f.width, f.height) != (w, h):
                raise EmptySequenceError(
                    f"sequence {self.name!r}: frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @classmethod
    def from_frames(cls, name: str, frames: Iterable[SegMask]) -> "MaskSequence":
        return cls(name=name, frames=tuple(frames))

    @classmethod
    def from_dir(cls, path, foreground_threshold: int = 1) -> "MaskSequence":
        """Load every mask image in a directory, lexicographic filename order."""
        d = Path(path)
        files = sorted(p for p in d.iterdir()
                       if p.is_file() and p.suffix.lower() in MASK_SUFFIXES)
        if not files:
            raise EmptySequenceError(f"no mask files (*.png, *.pgm) in {d}")
        return cls(name=d.name, frames=tuple(load_mask(p, foreground_threshold) for p in files))


@dataclass(frozen=True)
class TheoreticalTrack:
    """Per-frame optimal boxes of one family; None where the mask is empty."""

    family: BoxFamily
    per_frame: tuple[OptResult | None, ...]
    fixed_scale_origin: tuple[float, float] | None = None

    def phi_curve(self) -> list[float | None]:
        return [r.phi_opt if r is not None else None for r in self.per_frame]


def _optimize_frame(args) -> OptResult | None:
    mask, family, config = args
    if mask.is_empty:
        return None
    return optimize(mask, family, config)


def run_theoretical(seq: MaskSequence, family: BoxFamily,
                    config: OptimizerConfig = OptimizerConfig(),
                    jobs: int = 1, warm_start: bool = False) -> TheoreticalTrack:
    """Optimize every frame of the sequence for one family.

    For the fixed-scale family the scale is frozen from the axis-aligned
    optimum of frame 0 (which must be non-empty); frame 0's entry is that
    optimum itself.  Empty frames produce None entries: the optimal IoU is
    undefined without foreground, and aggregation policy belongs to the
    caller.

    ``warm_start`` adds the previous frame's optimum as an extra seed.  It
    only speeds convergence; results stay within optimizer noise of the
    cold-start ones.  Warm starting is inherently sequential, so it ignores
    ``jobs``.
    """
    fixed_origin = None
    if family.kind == "noscale" and family.scale_pending:
        if seq.frames[0].is_empty:
            raise EmptyFirstFrameError(
                f"sequence {seq.name!r}: fixed-scale tracking needs a non-empty first frame"
            )
        base = optimize(seq.frames[0], BoxFamily.axis_aligned(), config)
        fixed_origin = (base.box.w, base.box.h)
        family = BoxFamily.fixed_scale(*fixed_origin)
        rest = _run_frames(seq.frames[1:], family, config, jobs, warm_start, base.box)
        return TheoreticalTrack(family=family, per_frame=(base,) + rest,
                                fixed_scale_origin=fixed_origin)
    if family.kind == "noscale":
        fixed_origin = (family.fixed_w, family.fixed_h)
    per_frame = _run_frames(seq.frames, family, config, jobs, warm_start, None)
    return TheoreticalTrack(family=family, per_frame=per_frame,
                            fixed_scale_origin=fixed_origin)


def _run_frames(frames, family, config, jobs, warm_start, prev_box):
    if warm_start:
        results = []
        for mask in frames:
            if mask.is_empty:
                results.append(None)
                continue
            extra = (prev_box,) if prev_box is not None else ()
            res = optimize(mask, family, config, extra_seeds=extra)
            prev_box = res.box
            results.append(res)
        return tuple(results)
    work = [(mask, family, config) for mask in frames]
    if jobs > 1 and len(work) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            return tuple(pool.map(_optimize_frame, work))
    return tuple(map(_optimize_frame, work))


FAMILY_LABELS = {"aa": "aa", "rot": "rot", "noscale": "noscale"}


def export_curves(tracks: Sequence[TheoreticalTrack], out) -> None:
    """Write per-frame curves as CSV: frame,family,phi_opt,r_c,c_c,w,h,phi.

    Tracks must cover the same sequence (equal frame counts); empty frames
    produce rows with empty value fields.  Deterministic byte-for-byte for
    identical inputs.
    """
    if not tracks:
        raise ValueError("need at least one track")
    n = len(tracks[0].per_frame)
    if any(len(t.per_frame) != n for t in tracks):
        raise ValueError("tracks cover different numbers of frames")
    lines = ["frame,family,phi_opt,r_c,c_c,w,h,phi"]
    for track in tracks:
        label = FAMILY_LABELS[track.family.kind]
        for i, res in enumerate(track.per_frame):
            if res is None:
                lines.append(f"{i},{label},,,,,,")
            else:
                b = res.box
                vals = ",".join(format(v, ".6f") for v in
                                (res.phi_opt, b.rc, b.cc, b.w, b.h, b.phi))
                lines.append(f"{i},{label},{vals}")
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
