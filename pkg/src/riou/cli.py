"""Command-line interface.

Subcommands: optbox (best box for one mask), init (first-frame tracker
initialization box), theoretical (per-frame optimal-box curves), eval
(score tracker runs against a sequence), validate (optimizer vs exhaustive
oracle).  Exit status: 0 on success, 1 on validation failure or runtime
error, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluate as ev
from .boxes import format_box_line
from .masks import load_mask
from .optimize import BoxFamily, OptimizerConfig, optimize
from .oracle import DEFAULT_BUDGET, exhaustive_axis_aligned
from .theoretical import MaskSequence, export_curves, run_theoretical

_FAMILY_CHOICES = ("aa", "rot", "noscale")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riou",
        description="Optimal boxes for segmentation masks and relative-IoU evaluation",
    )
    parser.add_argument("--config", type=Path, help="optimizer config file (key = value lines)")
    parser.add_argument("--seed", type=int, help="override the optimizer RNG seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers (frames/masks)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optbox", help="print the optimal box and its IoU for one mask")
    p.add_argument("mask", type=Path)
    p.add_argument("--family", choices=_FAMILY_CHOICES, default="aa")
    p.add_argument("--fixed-w", type=float, help="fixed width for --family noscale")
    p.add_argument("--fixed-h", type=float, help="fixed height for --family noscale")
    p.add_argument("--threshold", type=int, default=1, help="foreground gray threshold")

    p = sub.add_parser("init", help="write the first-frame axis-aligned optimum")
    p.add_argument("--seq", type=Path, required=True, help="directory of mask images")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--threshold", type=int, default=1)

    p = sub.add_parser("theoretical", help="per-frame optimal-box curves for a sequence")
    p.add_argument("--seq", type=Path, required=True)
    p.add_argument("--family", choices=_FAMILY_CHOICES + ("all",), default="all")
    p.add_argument("--out", type=Path, required=True, help="curves CSV path")
    p.add_argument("--threshold", type=int, default=1)

    p = sub.add_parser("eval", help="score tracker run files against a sequence")
    p.add_argument("--seq", type=Path, required=True)
    p.add_argument("--run", type=Path, required=True, action="append",
                   help="tracker run file (repeatable)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threshold", type=int, default=1)

    p = sub.add_parser("validate", help="compare the optimizer against the exhaustive oracle")
    p.add_argument("--masks", type=Path, required=True, help="directory of mask images")
    p.add_argument("--out", type=Path, required=True, help="report CSV path")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="largest tolerated oracle-minus-optimizer IoU gap")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="max mask pixels for the exhaustive search")
    p.add_argument("--threshold", type=int, default=1)
    return parser


def _load_config(args) -> OptimizerConfig:
    config = OptimizerConfig.from_file(args.config) if args.config else OptimizerConfig()
    if args.seed is not None:
        config = replace(config, rng_seed=args.seed)
    return config


def _family_from_args(args) -> BoxFamily:
    if args.family == "noscale":
        if (args.fixed_w is None) != (args.fixed_h is None):
            raise ValueError("provide both --fixed-w and --fixed-h, or neither")
        return BoxFamily.fixed_scale(args.fixed_w, args.fixed_h)
    if args.fixed_w is not None or args.fixed_h is not None:
        raise ValueError("--fixed-w/--fixed-h only apply to --family noscale")
    return BoxFamily.axis_aligned() if args.family == "aa" else BoxFamily.oriented()


def _cmd_optbox(args, config) -> int:
    mask = load_mask(args.mask, args.threshold)
    family = _family_from_args(args)
    if family.scale_pending:
        # no explicit scale given: freeze the axis-aligned optimum's scale
        base = optimize(mask, BoxFamily.axis_aligned(), config)
        family = BoxFamily.fixed_scale(base.box.w, base.box.h)
    result = optimize(mask, family, config)
    print(f"box: {format_box_line(result.box)}")
    print(f"phi_opt: {result.phi_opt:.6f}")
    return 0


def _cmd_init(args, config) -> int:
    seq = MaskSequence.from_dir(args.seq, args.threshold)
    box = ev.emit_init_box(seq, args.out, config)
    print(f"wrote {args.out}: {format_box_line(box)}")
    return 0


def _cmd_theoretical(args, config) -> int:
    seq = MaskSequence.from_dir(args.seq, args.threshold)
    kinds = list(_FAMILY_CHOICES) if args.family == "all" else [args.family]
    tracks = []
    for kind in kinds:
        family = {"aa": BoxFamily.axis_aligned(), "rot": BoxFamily.oriented(),
                  "noscale": BoxFamily.fixed_scale()}[kind]
        tracks.append(run_theoretical(seq, family, config, jobs=args.jobs))
    export_curves(tracks, args.out)
    print(f"wrote {args.out} ({len(tracks)} track(s), {len(seq)} frames)")
    return 0


def _cmd_eval(args, config) -> int:
    seq = MaskSequence.from_dir(args.seq, args.threshold)
    runs = [ev.load_tracker_run(path, seq) for path in args.run]
    needed = sorted({run.abilities for run in runs})
    tracks = {}
    for kind in needed:
        family = {"aa": BoxFamily.axis_aligned(), "rot": BoxFamily.oriented(),
                  "noscale": BoxFamily.fixed_scale()}[kind]
        tracks[kind] = run_theoretical(seq, family, config, jobs=args.jobs)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    evals = []
    for run in runs:
        result = ev.score_run(run, seq, tracks)
        evals.append(result)
        stem = f"{run.tracker_name}_{seq.name}"
        ev.write_frames_csv(result, out / f"{stem}_frames.csv")
        ev.write_sequence_json(result, out / f"{stem}.json")
    report = ev.aggregate_dataset(evals)
    ev.write_dataset_csv(report, out / "dataset.csv")
    ev.write_dataset_json(report, out / "dataset.json")
    print(f"wrote {out}/dataset.csv ({len(evals)} run(s))")
    return 0


def _validate_one(task):
    path, threshold, budget, config = task
    mask = load_mask(path, threshold)
    oracle = exhaustive_axis_aligned(mask, budget)
    opt = optimize(mask, BoxFamily.axis_aligned(), config)
    return path.name, oracle.phi_value, opt.phi_opt


def _cmd_validate(args, config) -> int:
    files = sorted(p for p in args.masks.iterdir()
                   if p.is_file() and p.suffix.lower() in (".png", ".pgm"))
    if not files:
        print(f"no mask files in {args.masks}", file=sys.stderr)
        return 1
    tasks = [(p, args.threshold, args.budget, config) for p in files]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_validate_one, tasks))
    else:
        rows = [_validate_one(t) for t in tasks]
    lines = ["mask,oracle_phi,optimizer_phi,delta"]
    worst = 0.0
    for name, oracle_phi, opt_phi, in rows:
        delta = opt_phi - oracle_phi
        worst = min(worst, delta)
        lines.append(f"{name},{oracle_phi:.6f},{opt_phi:.6f},{delta:.6f}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    failed = [name for (name, o, p) in rows if p - o < -args.tol]
    print(f"wrote {args.out}: {len(rows)} masks, worst delta {worst:.6f}")
    if failed:
        print(f"validation FAILED on {len(failed)} mask(s): {', '.join(failed)}",
              file=sys.stderr)
        return 1
    return 0


_COMMANDS = {
    "optbox": _cmd_optbox,
    "init": _cmd_init,
    "theoretical": _cmd_theoretical,
    "eval": _cmd_eval,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        return _COMMANDS[args.command](args, config)
    except Exception as exc:  # runtime failures are reported, not traced
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
