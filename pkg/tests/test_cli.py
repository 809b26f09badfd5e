import numpy as np
import pytest
from PIL import Image

from riou.boxes import OrientedBox, format_box_line, parse_box_line
from riou.cli import main
from riou.masks import SegMask
from riou.synthetic import rectangle_mask, synthetic_suite


def save_mask(mask: SegMask, path) -> None:
    Image.fromarray(mask.to_array().astype(np.uint8) * 255, mode="L").save(path)


@pytest.fixture()
def rect_png(tmp_path):
    path = tmp_path / "rect.png"
    save_mask(rectangle_mask(24, 18, 4, 5, 8, 12), path)
    return path


@pytest.fixture()
def seq_dir(tmp_path):
    d = tmp_path / "drift"
    d.mkdir()
    for k in range(3):
        save_mask(rectangle_mask(32, 24, 4 + k, 5 + k, 8, 12), d / f"{k:05d}.png")
    return d


class TestOptbox:
    def test_rectangle_prints_perfect_phi(self, rect_png, capsys):
        assert main([ "optbox", str(rect_png)]) == 0
        out = capsys.readouterr().out
        assert "phi_opt: 1.000000" in out
        box = parse_box_line(out.splitlines()[0].removeprefix("box: "))
        assert (box.rc, box.cc, box.w, box.h) == (8.0, 11.0, 12.0, 8.0)

    def test_oriented_family(self, rect_png, capsys):
        assert main(["optbox", str(rect_png), "--family", "rot"]) == 0
        assert "phi_opt: 1.000000" in capsys.readouterr().out

    def test_noscale_defaults_to_frame_scale(self, rect_png, capsys):
        assert main(["optbox", str(rect_png), "--family", "noscale"]) == 0
        assert "phi_opt: 1.000000" in capsys.readouterr().out

    def test_noscale_explicit_scale(self, rect_png, capsys):
        assert main(["optbox", str(rect_png), "--family", "noscale",
                     "--fixed-w", "6", "--fixed-h", "4"]) == 0
        out = capsys.readouterr().out
        box = parse_box_line(out.splitlines()[0].removeprefix("box: "))
        assert (box.w, box.h) == (6.0, 4.0)
        assert "phi_opt: 0.250000" in out  # 24 / 96

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        assert main(["optbox", str(tmp_path / "nope.png")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exits_two(self, rect_png):
        with pytest.raises(SystemExit) as exc:
            main(["optbox", str(rect_png), "--family", "hexagon"])
        assert exc.value.code == 2

    def test_mismatched_fixed_scale_flags(self, rect_png, capsys):
        assert main(["optbox", str(rect_png), "--family", "noscale", "--fixed-w", "6"]) == 1
        assert "error:" in capsys.readouterr().err


class TestInit:
    def test_writes_init_box(self, seq_dir, tmp_path, capsys):
        out = tmp_path / "init.txt"
        assert main(["init", "--seq", str(seq_dir), "--out", str(out)]) == 0
        box = parse_box_line(out.read_text().strip())
        assert (box.rc, box.cc, box.w, box.h, box.phi) == (8.0, 11.0, 12.0, 8.0, 0.0)


class TestTheoretical:
    def test_all_families_csv(self, seq_dir, tmp_path):
        out = tmp_path / "curves.csv"
        assert main(["theoretical", "--seq", str(seq_dir), "--family", "all",
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "frame,family,phi_opt,r_c,c_c,w,h,phi"
        assert len(lines) == 1 + 3 * 3
        families = {ln.split(",")[1] for ln in lines[1:]}
        assert families == {"aa", "rot", "noscale"}

    def test_single_family(self, seq_dir, tmp_path):
        out = tmp_path / "aa.csv"
        assert main(["theoretical", "--seq", str(seq_dir), "--family", "aa",
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 4


class TestEval:
    def test_perfect_run_scores_one(self, seq_dir, tmp_path):
        curves = tmp_path / "curves.csv"
        assert main(["theoretical", "--seq", str(seq_dir), "--family", "aa",
                     "--out", str(curves)]) == 0
        rows = [ln.split(",") for ln in curves.read_text().splitlines()[1:]]
        boxes = [OrientedBox(float(r[3]), float(r[4]), float(r[5]), float(r[6]), float(r[7]))
                 for r in rows]
        run_file = tmp_path / "perfect.txt"
        run_file.write_text("# tracker=perfect abilities=aa\n"
                            + "".join(format_box_line(b) + "\n" for b in boxes))
        out_dir = tmp_path / "report"
        assert main(["eval", "--seq", str(seq_dir), "--run", str(run_file),
                     "--out", str(out_dir)]) == 0
        dataset = (out_dir / "dataset.csv").read_text().splitlines()
        assert dataset[0] == "tracker,mean_iou,mean_riou,riou_ratio_of_means,failures,skips"
        fields = dataset[1].split(",")
        assert fields[0] == "perfect"
        assert fields[2] == "1.000000"
        assert (out_dir / "perfect_drift_frames.csv").exists()
        assert (out_dir / "perfect_drift.json").exists()
        assert (out_dir / "dataset.json").exists()

    def test_bad_run_file_is_runtime_error(self, seq_dir, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("# tracker=x abilities=aa\n1 2 3 4 0\n")  # wrong length
        assert main(["eval", "--seq", str(seq_dir), "--run", str(bad),
                     "--out", str(tmp_path / "r")]) == 1
        assert "error:" in capsys.readouterr().err


class TestValidate:
    def test_passes_on_easy_masks(self, tmp_path, capsys):
        masks_dir = tmp_path / "masks"
        masks_dir.mkdir()
        for i, mask in enumerate(synthetic_suite(seed=97, count=3, min_size=24, max_size=32)):
            save_mask(mask, masks_dir / f"m{i}.png")
        out = tmp_path / "validate.csv"
        assert main(["validate", "--masks", str(masks_dir), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "mask,oracle_phi,optimizer_phi,delta"
        assert len(lines) == 4
        for ln in lines[1:]:
            assert float(ln.split(",")[3]) >= -1e-3

    def test_fails_when_tolerance_is_impossible(self, tmp_path, capsys):
        masks_dir = tmp_path / "masks"
        masks_dir.mkdir()
        # two overlapping ellipses: optimizer ties the oracle only within
        # float noise, so an absurd negative tolerance must flag it
        for i, mask in enumerate(synthetic_suite(seed=99, count=2, min_size=24, max_size=32)):
            save_mask(mask, masks_dir / f"m{i}.png")
        out = tmp_path / "v.csv"
        assert main(["validate", "--masks", str(masks_dir), "--out", str(out),
                     "--tol", "-0.5"]) == 1
        assert "FAILED" in capsys.readouterr().err

    def test_empty_dir(self, tmp_path, capsys):
        masks_dir = tmp_path / "masks"
        masks_dir.mkdir()
        assert main(["validate", "--masks", str(masks_dir), "--out", str(tmp_path / "v.csv")]) == 1


class TestGlobalFlags:
    def test_config_file_is_loaded(self, rect_png, tmp_path, capsys):
        cfg = tmp_path / "opt.cfg"
        cfg.write_text("restart_samples = 3\n")
        assert main(["--config", str(cfg), "optbox", str(rect_png)]) == 0

    def test_bad_config_is_runtime_error(self, rect_png, tmp_path, capsys):
        cfg = tmp_path / "opt.cfg"
        cfg.write_text("bogus_key = 3\n")
        assert main(["--config", str(cfg), "optbox", str(rect_png)]) == 1

    def test_seed_flag_accepted(self, rect_png):
        assert main(["--seed", "7", "optbox", str(rect_png)]) == 0

    def test_jobs_flag_on_validate(self, tmp_path):
        masks_dir = tmp_path / "masks"
        masks_dir.mkdir()
        for i, mask in enumerate(synthetic_suite(seed=97, count=2, min_size=24, max_size=28)):
            save_mask(mask, masks_dir / f"m{i}.png")
        out = tmp_path / "v.csv"
        assert main(["--jobs", "2", "validate", "--masks", str(masks_dir),
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 3
