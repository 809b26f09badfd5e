import csv
import json
import math

import pytest

from riou.boxes import OrientedBox, format_box_line, iou_box_box, iou_box_mask
from riou.errors import EmptyFirstFrameError, EvaluationConfigError, TrackerRunError
from riou.evaluate import (
    RIOU_SLACK,
    TrackerRun,
    aggregate_dataset,
    emit_init_box,
    load_tracker_run,
    rounded_aggregates,
    score_run,
    track_as_run,
    write_frames_csv,
    write_sequence_json,
    write_tracker_run,
)
from riou.masks import SegMask, axis_aligned_bbox
from riou.optimize import BoxFamily, OptimizerConfig
from riou.synthetic import rectangle_mask, ring_mask
from riou.theoretical import MaskSequence, run_theoretical

FAST = OptimizerConfig(restart_samples=8)


@pytest.fixture(scope="module")
def seq():
    frames = [rectangle_mask(32, 24, 4 + k, 5 + k, 8, 12) for k in range(3)]
    return MaskSequence.from_frames("drift", frames)


@pytest.fixture(scope="module")
def tracks(seq):
    fams = [BoxFamily.axis_aligned(), BoxFamily.oriented(), BoxFamily.fixed_scale()]
    return {f.kind: run_theoretical(seq, f, FAST) for f in fams}


def run_file_text(boxes, tracker="toy", abilities="aa"):
    lines = [f"# tracker={tracker} abilities={abilities}"]
    lines += [format_box_line(b) if b is not None else "skip" for b in boxes]
    return "\n".join(lines) + "\n"


class TestLoadTrackerRun:
    def test_basic(self, tmp_path, seq):
        boxes = [OrientedBox(8 + k, 11 + k, 12, 8, 0) for k in range(3)]
        path = tmp_path / "toy.txt"
        path.write_text(run_file_text(boxes))
        run = load_tracker_run(path, seq)
        assert run.tracker_name == "toy"
        assert run.abilities == "aa"
        assert run.sequence_name == "drift"
        assert run.per_frame == tuple(boxes)

    def test_skip_lines(self, tmp_path, seq):
        path = tmp_path / "t.txt"
        path.write_text(run_file_text([OrientedBox(8, 11, 12, 8, 0), None,
                                       OrientedBox(10, 13, 12, 8, 0)]))
        run = load_tracker_run(path, seq)
        assert run.per_frame[1] is None

    def test_length_mismatch(self, tmp_path, seq):
        path = tmp_path / "t.txt"
        path.write_text(run_file_text([OrientedBox(8, 11, 12, 8, 0)] * 2))
        with pytest.raises(TrackerRunError, match="2 frame lines"):
            load_tracker_run(path, seq)

    def test_malformed_line_reports_number(self, tmp_path, seq):
        path = tmp_path / "t.txt"
        path.write_text("# tracker=x abilities=aa\n1 2 3 4 0\nnot a box\n5 6 7 8 0\n")
        with pytest.raises(TrackerRunError, match="line 3"):
            load_tracker_run(path, seq)

    def test_missing_or_bad_header(self, tmp_path, seq):
        path = tmp_path / "t.txt"
        path.write_text("1 2 3 4 0\n" * 3)
        with pytest.raises(TrackerRunError, match="header"):
            load_tracker_run(path, seq)
        path.write_text("# tracker=x abilities=circles\n" + "1 2 3 4 0\n" * 3)
        with pytest.raises(TrackerRunError):
            load_tracker_run(path, seq)

    def test_rotated_box_in_axis_aligned_run_rejected(self, tmp_path, seq):
        path = tmp_path / "t.txt"
        path.write_text("# tracker=x abilities=aa\n1 2 3 4 0\n1 2 3 4 15\n1 2 3 4 0\n")
        with pytest.raises(TrackerRunError, match="rotated box"):
            load_tracker_run(path, seq)

    def test_round_trip(self, tmp_path, seq):
        boxes = [OrientedBox(8.123456789, 11.5, 12.25, 8.75, 33.125), None,
                 OrientedBox(10.0, 13.0, 12.0, 8.0, 0.0)]
        run = TrackerRun("rt", "drift", "rot", tuple(boxes))
        path = tmp_path / "rt.txt"
        write_tracker_run(run, path)
        assert load_tracker_run(path, seq) == run


class TestEmitInitBox:
    def test_rectangle_first_frame(self, tmp_path, seq, tracks):
        out = tmp_path / "init.txt"
        box = emit_init_box(seq, out, FAST)
        assert iou_box_mask(box, seq.frames[0]) == pytest.approx(1.0, abs=1e-6)
        from riou.boxes import parse_box_line
        assert parse_box_line(out.read_text().strip()) == box
        # same computation as the frame-0 theoretical optimum
        assert box == tracks["aa"].per_frame[0].box

    def test_empty_first_frame(self, tmp_path):
        seq = MaskSequence.from_frames("e", [SegMask.from_runs(8, 8, []),
                                             rectangle_mask(8, 8, 1, 1, 3, 3)])
        with pytest.raises(EmptyFirstFrameError):
            emit_init_box(seq, tmp_path / "x.txt", FAST)


class TestScoreRun:
    def test_theoretical_track_scores_one(self, seq, tracks):
        for kind, track in tracks.items():
            run = track_as_run(track, seq, f"self_{kind}")
            ev = score_run(run, seq, tracks)
            assert ev.mean_riou == pytest.approx(1.0, abs=1e-12)
            assert all(f.riou == pytest.approx(1.0, abs=1e-12) for f in ev.frames)
            assert ev.failure_count == 0

    def test_disjoint_tracker_fails_every_frame(self, seq, tracks):
        run = TrackerRun("lost", "drift", "aa",
                         tuple(OrientedBox(2, 28, 3, 3, 0) for _ in range(3)))
        ev = score_run(run, seq, tracks)
        assert ev.mean_iou == 0.0
        assert ev.mean_riou == 0.0
        assert ev.failure_count == 3
        assert all(f.failed for f in ev.frames)

    def test_absent_boxes_score_zero(self, seq, tracks):
        run = TrackerRun("quitter", "drift", "aa", (None, None, None))
        ev = score_run(run, seq, tracks)
        assert ev.mean_iou == 0.0
        assert ev.failure_count == 3

    def test_equal_iou_means_equal_riou_regardless_of_shape(self, tracks):
        mask = rectangle_mask(32, 24, 8, 10, 8, 12)
        seq1 = MaskSequence.from_frames("one", [mask])
        fams = {"rot": run_theoretical(seq1, BoxFamily.oriented(), FAST)}
        # two different boxes engineered to have the same IoU by symmetry
        a = OrientedBox(12.0, 13.0, 12, 8, 0)   # shifted left
        b = OrientedBox(12.0, 19.0, 12, 8, 0)   # mirrored shift right
        assert iou_box_mask(a, mask) == pytest.approx(iou_box_mask(b, mask), abs=1e-12)
        ev_a = score_run(TrackerRun("a", "one", "rot", (a,)), seq1, fams)
        ev_b = score_run(TrackerRun("b", "one", "rot", (b,)), seq1, fams)
        assert ev_a.frames[0].riou == pytest.approx(ev_b.frames[0].riou, abs=1e-12)

    def test_monotone_in_iou(self, seq, tracks):
        better = TrackerRun("b", "drift", "aa", tuple(
            OrientedBox(8 + k, 11 + k, 12, 8, 0) for k in range(3)))
        worse = TrackerRun("w", "drift", "aa", tuple(
            OrientedBox(8 + k, 13 + k, 12, 8, 0) for k in range(3)))
        ev_b = score_run(better, seq, tracks)
        ev_w = score_run(worse, seq, tracks)
        for fb, fw in zip(ev_b.frames, ev_w.frames):
            assert fb.iou > fw.iou
            assert fb.riou > fw.riou

    def test_abilities_must_match_a_track(self, seq, tracks):
        run = TrackerRun("r", "drift", "rot", tuple(
            OrientedBox(8 + k, 11 + k, 12, 8, 10.0) for k in range(3)))
        with pytest.raises(EvaluationConfigError):
            score_run(run, seq, {"aa": tracks["aa"]})
        score_run(run, seq, tracks)  # with the right track available it works

    def test_riou_dominance_for_in_family_boxes(self, seq, tracks, rng):
        for _ in range(10):
            boxes = tuple(OrientedBox(float(rng.uniform(6, 14)), float(rng.uniform(8, 16)),
                                      float(rng.uniform(4, 16)), float(rng.uniform(4, 12)), 0.0)
                          for _ in range(3))
            ev = score_run(TrackerRun("r", "drift", "aa", boxes), seq, tracks)
            assert all(f.riou <= 1.0 + RIOU_SLACK for f in ev.frames)

    def test_empty_mask_frames_are_skipped(self):
        full = rectangle_mask(16, 16, 2, 2, 6, 6)
        empty = SegMask.from_runs(16, 16, [])
        seq = MaskSequence.from_frames("occ", [full, empty, full])
        tracks = {"aa": run_theoretical(seq, BoxFamily.axis_aligned(), FAST)}
        box = OrientedBox(5, 5, 6, 6, 0)
        ev = score_run(TrackerRun("t", "occ", "aa", (box, box, box)), seq, tracks)
        assert ev.skipped_frames == 1
        assert ev.frames[1].iou is None
        assert not ev.frames[1].failed
        assert ev.mean_iou == pytest.approx(1.0)  # mean over the two scored frames

    def test_failure_fires_on_segmentation_not_bbox(self, tracks):
        mask = ring_mask(32, 32, 8, 8, 16, 3)
        seq1 = MaskSequence.from_frames("ring", [mask])
        fams = {"aa": run_theoretical(seq1, BoxFamily.axis_aligned(), FAST)}
        inside_hole = OrientedBox(16.0, 16.0, 6, 6, 0)
        ev = score_run(TrackerRun("h", "ring", "aa", (inside_hole,)), seq1, fams)
        assert ev.frames[0].iou == 0.0
        assert ev.frames[0].failed
        assert iou_box_box(inside_hole, axis_aligned_bbox(mask)) > 0.0


class TestAggregateDataset:
    def _toy_eval(self, tracker, sequence, mean_iou, mean_riou, failures=0, skips=0):
        from riou.evaluate import FrameScore, SequenceEval
        return SequenceEval(tracker, sequence, (FrameScore(0, mean_iou, 1.0, mean_riou, False),),
                            mean_iou, mean_riou, mean_iou, failures, skips)

    def test_single_sequence_passthrough(self):
        report = aggregate_dataset([self._toy_eval("t", "s", 0.5, 0.7)])
        assert report.rows[0]["mean_riou"] == pytest.approx(0.7)

    def test_two_sequences_average(self):
        report = aggregate_dataset([self._toy_eval("t", "s1", 0.3, 0.4, failures=2),
                                    self._toy_eval("t", "s2", 0.5, 0.8, skips=1)])
        row = report.rows[0]
        assert row["mean_riou"] == pytest.approx(0.6)
        assert row["mean_iou"] == pytest.approx(0.4)
        assert row["failures"] == 2
        assert row["skips"] == 1

    def test_sorted_by_tracker(self):
        report = aggregate_dataset([self._toy_eval("zeta", "s", 0.1, 0.1),
                                    self._toy_eval("alpha", "s", 0.2, 0.2)])
        assert [r["tracker"] for r in report.rows] == ["alpha", "zeta"]

    def test_fixed_scale_tracker_normalized_by_its_own_abilities(self):
        # a perfect fixed-scale tracker reaches rIoU 1.0 even where the
        # axis-aligned optimum would make it look worse
        frames = [rectangle_mask(48, 48, 10, 10, 10, 10),
                  rectangle_mask(48, 48, 8, 8, 14, 14)]
        seq = MaskSequence.from_frames("grow2", frames)
        ns_track = run_theoretical(seq, BoxFamily.fixed_scale(), FAST)
        aa_track = run_theoretical(seq, BoxFamily.axis_aligned(), FAST)
        run = track_as_run(ns_track, seq, "kcf_like")
        ev = score_run(run, seq, {"noscale": ns_track, "aa": aa_track})
        report = aggregate_dataset([ev])
        assert report.rows[0]["mean_riou"] == pytest.approx(1.0, abs=1e-9)
        assert report.rows[0]["mean_iou"] < 0.9  # absolute IoU shows the scale gap

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate_dataset([])


class TestReports:
    def test_frames_csv_and_json_round_trip(self, tmp_path, seq, tracks, rng):
        boxes = tuple(OrientedBox(8.1 + k, 11.2 + k, 11.7, 8.2, 0.0) for k in range(3))
        ev = score_run(TrackerRun("toy", "drift", "aa", boxes), seq, tracks)
        csv_path = tmp_path / "frames.csv"
        json_path = tmp_path / "seq.json"
        write_frames_csv(ev, csv_path)
        write_sequence_json(ev, json_path)

        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        assert [r["frame"] for r in rows] == ["0", "1", "2"]
        # re-aggregate the CSV exactly as the report layer does
        ious = [float(r["iou"]) for r in rows if r["iou"] != ""]
        rious = [min(float(r["riou"]), 1.0) for r in rows if r["riou"] != ""]
        phis = [float(r["phi_opt"]) for r in rows if r["phi_opt"] != ""]
        payload = json.loads(json_path.read_text())
        assert payload["mean_iou"] == sum(ious) / len(ious)
        assert payload["mean_riou"] == sum(rious) / len(rious)
        assert payload["riou_ratio_of_means"] == (sum(ious) / len(ious)) / (sum(phis) / len(phis))
        assert payload["failure_count"] == ev.failure_count
        assert payload["tracker"] == "toy"

    def test_csv_has_six_decimal_places(self, tmp_path, seq, tracks):
        boxes = tuple(OrientedBox(8 + k, 11 + k, 12, 8, 0) for k in range(3))
        ev = score_run(TrackerRun("toy", "drift", "aa", boxes), seq, tracks)
        write_frames_csv(ev, tmp_path / "f.csv")
        line = (tmp_path / "f.csv").read_text().splitlines()[1]
        fields = line.split(",")
        assert all("." in f and len(f.split(".")[1]) == 6 for f in fields[1:4])

    def test_empty_mask_frame_written_with_empty_fields(self, tmp_path):
        full = rectangle_mask(16, 16, 2, 2, 6, 6)
        empty = SegMask.from_runs(16, 16, [])
        seq1 = MaskSequence.from_frames("occ", [full, empty])
        tr = {"aa": run_theoretical(seq1, BoxFamily.axis_aligned(), FAST)}
        box = OrientedBox(5, 5, 6, 6, 0)
        ev = score_run(TrackerRun("t", "occ", "aa", (box, box)), seq1, tr)
        write_frames_csv(ev, tmp_path / "f.csv")
        assert (tmp_path / "f.csv").read_text().splitlines()[2] == "1,,,,0"

    def test_rounded_aggregates_handle_all_skipped(self):
        from riou.evaluate import FrameScore
        agg = rounded_aggregates([FrameScore(0, None, None, None, False)])
        assert math.isnan(agg["mean_iou"])
        assert agg["skipped_frames"] == 1
