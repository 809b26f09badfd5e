"""Scoring tracker trajectories against segmentations with relative IoU.

A tracker's per-frame IoU is normalized by the optimal IoU that a box of
the tracker's own family could reach on that frame, so the score measures
how well the tracker does relative to its abilities rather than how well a
box can approximate the object.  Failures are frames with zero overlap
against the segmentation itself, which fires as soon as the tracker leaves
the object, not merely its bounding box.

Trajectories come from files in the box text format, one line per frame
(`r_c c_c w h phi_deg`, or `skip` for frames without output) under a header
`# tracker=<name> abilities={noscale|aa|rot}`.  Trackers are never
reinitialized: a lost target stays lost and keeps scoring zero.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .boxes import OrientedBox, canonicalize, format_box_line, iou_box_mask, parse_box_line
from .errors import EmptyFirstFrameError, EvaluationConfigError, TrackerRunError
from .optimize import BoxFamily, OptimizerConfig, optimize
from .theoretical import MaskSequence, TheoreticalTrack

RIOU_SLACK = 1e-3  # tolerated overshoot of iou/phi_opt before clamping


@dataclass(frozen=True)
class TrackerRun:
    tracker_name: str
    sequence_name: str
    abilities: str  # family kind: "aa", "rot" or "noscale"
    per_frame: tuple[OrientedBox | None, ...]


@dataclass(frozen=True)
class FrameScore:
    """One frame's scores; None on frames whose mask is empty."""

    frame: int
    iou: float | None
    phi_opt: float | None
    riou: float | None  # raw iou / phi_opt, NOT clamped
    failed: bool


@dataclass(frozen=True)
class SequenceEval:
    tracker_name: str
    sequence_name: str
    frames: tuple[FrameScore, ...]
    mean_iou: float
    mean_riou: float  # mean of per-frame ratios clamped to [0, 1]
    riou_ratio_of_means: float  # secondary aggregate: mean(iou) / mean(phi_opt)
    failure_count: int
    skipped_frames: int


_HEADER_PREFIX = "# tracker="


def load_tracker_run(path, seq: MaskSequence) -> TrackerRun:
    """Parse a trajectory file and pair it with its sequence."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise TrackerRunError(f"{path}: missing `{_HEADER_PREFIX}<name> abilities=...` header")
    header = lines[0]
    fields = dict(
        part.split("=", 1) for part in header.lstrip("#").split() if "=" in part
    )
    name = fields.get("tracker")
    abilities = fields.get("abilities")
    if not name or abilities not in ("aa", "rot", "noscale"):
        raise TrackerRunError(
            f"{path}: header must declare tracker=<name> and abilities in {{noscale|aa|rot}}"
        )
    body = [ln for ln in lines[1:]]
    if len(body) != len(seq):
        raise TrackerRunError(
            f"{path}: {len(body)} frame lines for a {len(seq)}-frame sequence"
        )
    boxes: list[OrientedBox | None] = []
    for i, line in enumerate(body, start=2):
        text = line.strip()
        if text == "skip":
            boxes.append(None)
            continue
        try:
            box = canonicalize(parse_box_line(text))
        except ValueError as exc:
            raise TrackerRunError(f"{path}: line {i}: {exc}") from None
        if abilities in ("aa", "noscale") and box.phi != 0.0:
            raise TrackerRunError(
                f"{path}: line {i}: rotated box in a run declaring {abilities!r} abilities"
            )
        boxes.append(box)
    return TrackerRun(tracker_name=name, sequence_name=seq.name,
                      abilities=abilities, per_frame=tuple(boxes))


def write_tracker_run(run: TrackerRun, path) -> None:
    """Inverse of :func:`load_tracker_run` (full round-trip precision)."""
    lines = [f"# tracker={run.tracker_name} abilities={run.abilities}"]
    lines += [format_box_line(b) if b is not None else "skip" for b in run.per_frame]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def track_as_run(track: TheoreticalTrack, seq: MaskSequence, name: str) -> TrackerRun:
    """Repackage a theoretical track as a tracker run of its own family."""
    return TrackerRun(
        tracker_name=name,
        sequence_name=seq.name,
        abilities=track.family.kind,
        per_frame=tuple(r.box if r is not None else None for r in track.per_frame),
    )


def emit_init_box(seq: MaskSequence, out,
                  config: OptimizerConfig = OptimizerConfig()) -> OrientedBox:
    """Write the frame-0 axis-aligned optimum in the box text format.

    This is the box trackers should be initialized with.
    """
    if seq.frames[0].is_empty:
        raise EmptyFirstFrameError(f"sequence {seq.name!r}: first frame is empty")
    result = optimize(seq.frames[0], BoxFamily.axis_aligned(), config)
    Path(out).write_text(format_box_line(result.box) + "\n", encoding="utf-8")
    return result.box


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else math.nan


def score_run(run: TrackerRun, seq: MaskSequence,
              tracks: Mapping[str, TheoreticalTrack] | Iterable[TheoreticalTrack]) -> SequenceEval:
    """Per-frame IoU / optimal-IoU scores for one tracker on one sequence.

    ``tracks`` provides the normalizers; the one whose family kind matches
    the run's declared abilities is used, and a missing match is a
    configuration error (normalizing e.g. an oriented tracker by the
    axis-aligned optimum would produce ratios above 1).  Frames with empty
    masks are skipped; frames where the tracker reported nothing score an
    IoU of 0 against a non-empty mask.
    """
    if len(run.per_frame) != len(seq):
        raise EvaluationConfigError(
            f"run {run.tracker_name!r} has {len(run.per_frame)} frames, "
            f"sequence {seq.name!r} has {len(seq)}"
        )
    if not isinstance(tracks, Mapping):
        tracks = {t.family.kind: t for t in tracks}
    track = tracks.get(run.abilities)
    if track is None:
        raise EvaluationConfigError(
            f"no {run.abilities!r} reference track supplied for tracker {run.tracker_name!r}"
        )
    if len(track.per_frame) != len(seq):
        raise EvaluationConfigError("reference track does not cover the sequence")

    frames: list[FrameScore] = []
    ious: list[float] = []
    rious_clamped: list[float] = []
    phis: list[float] = []
    failures = 0
    skipped = 0
    for i, mask in enumerate(seq.frames):
        if mask.is_empty:
            frames.append(FrameScore(i, None, None, None, False))
            skipped += 1
            continue
        ref = track.per_frame[i]
        assert ref is not None  # non-empty frames always have an optimum
        box = run.per_frame[i]
        iou = iou_box_mask(box, mask) if box is not None else 0.0
        riou = iou / ref.phi_opt
        failed = iou == 0.0
        failures += failed
        frames.append(FrameScore(i, iou, ref.phi_opt, riou, failed))
        ious.append(iou)
        phis.append(ref.phi_opt)
        rious_clamped.append(min(riou, 1.0))
    mean_iou = _mean(ious)
    mean_phi = _mean(phis)
    return SequenceEval(
        tracker_name=run.tracker_name,
        sequence_name=run.sequence_name,
        frames=tuple(frames),
        mean_iou=mean_iou,
        mean_riou=_mean(rious_clamped),
        riou_ratio_of_means=mean_iou / mean_phi if phis else math.nan,
        failure_count=failures,
        skipped_frames=skipped,
    )


@dataclass(frozen=True)
class DatasetReport:
    """Unweighted per-tracker means over sequences (each sequence counts once)."""

    rows: tuple[dict, ...]

    def as_csv_text(self) -> str:
        lines = ["tracker,mean_iou,mean_riou,riou_ratio_of_means,failures,skips"]
        for row in self.rows:
            lines.append(
                f"{row['tracker']},{row['mean_iou']:.6f},{row['mean_riou']:.6f},"
                f"{row['riou_ratio_of_means']:.6f},{row['failures']},{row['skips']}"
            )
        return "\n".join(lines) + "\n"


def aggregate_dataset(evals: Sequence[SequenceEval]) -> DatasetReport:
    """Aggregate sequence evaluations per tracker, sorted by tracker name."""
    if not evals:
        raise ValueError("need at least one sequence evaluation")
    by_tracker: dict[str, list[SequenceEval]] = {}
    for ev in evals:
        by_tracker.setdefault(ev.tracker_name, []).append(ev)
    rows = []
    for tracker in sorted(by_tracker):
        group = sorted(by_tracker[tracker], key=lambda e: e.sequence_name)
        rows.append({
            "tracker": tracker,
            "mean_iou": _mean([e.mean_iou for e in group]),
            "mean_riou": _mean([e.mean_riou for e in group]),
            "riou_ratio_of_means": _mean([e.riou_ratio_of_means for e in group]),
            "failures": sum(e.failure_count for e in group),
            "skips": sum(e.skipped_frames for e in group),
        })
    return DatasetReport(rows=tuple(rows))


def _round6(x: float | None) -> float | None:
    return None if x is None else round(x, 6)


def write_frames_csv(ev: SequenceEval, path) -> None:
    """Per-frame CSV `frame,iou,phi_opt,riou,failed` with 6-decimal values.

    The riou column is the raw ratio (clamping happens only in aggregates);
    empty-mask frames have empty value fields and failed = 0.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "iou", "phi_opt", "riou", "failed"])
        for fs in ev.frames:
            if fs.iou is None:
                writer.writerow([fs.frame, "", "", "", 0])
            else:
                writer.writerow([fs.frame, f"{fs.iou:.6f}", f"{fs.phi_opt:.6f}",
                                 f"{fs.riou:.6f}", int(fs.failed)])


def rounded_aggregates(frames: Sequence[FrameScore]) -> dict:
    """Aggregates recomputed from 6-decimal per-frame values.

    This is what the sequence JSON stores, so re-reading the per-frame CSV
    and re-aggregating reproduces the JSON numbers exactly.
    """
    ious = [_round6(f.iou) for f in frames if f.iou is not None]
    phis = [_round6(f.phi_opt) for f in frames if f.phi_opt is not None]
    rious = [min(_round6(f.riou), 1.0) for f in frames if f.riou is not None]
    mean_iou = _mean(ious)
    mean_phi = _mean(phis)
    return {
        "mean_iou": mean_iou,
        "mean_riou": _mean(rious),
        "riou_ratio_of_means": mean_iou / mean_phi if phis else math.nan,
        "failure_count": sum(1 for f in frames if f.failed),
        "skipped_frames": sum(1 for f in frames if f.iou is None),
    }


def write_sequence_json(ev: SequenceEval, path) -> None:
    """Sequence report with all frame scores plus CSV-consistent aggregates."""
    payload = {
        "tracker": ev.tracker_name,
        "sequence": ev.sequence_name,
        "frames": [
            {
                "frame": fs.frame,
                "iou": _round6(fs.iou),
                "phi_opt": _round6(fs.phi_opt),
                "riou": _round6(fs.riou),
                "failed": fs.failed,
            }
            for fs in ev.frames
        ],
        **rounded_aggregates(ev.frames),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_dataset_csv(report: DatasetReport, path) -> None:
    Path(path).write_text(report.as_csv_text(), encoding="utf-8")


def write_dataset_json(report: DatasetReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"trackers": list(report.rows)}, fh, indent=2)
        fh.write("\n")
