"""Command line: ``stconceal {simulate,conceal,evaluate,table}``.

Every command reads an optional ``--config`` file (see :mod:`stconceal.config`)
and lets flags override individual keys.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import metrics
from .config import ExperimentSpec
from .loss_sim import LossMap, PlacementError, apply_losses, generate_losses
from .pipeline import conceal_sequence
from .video_io import Sequence, VideoFormatError, read_yuv420, write_frame_image, write_yuv420

log = logging.getLogger("stconceal")

METHODS = ("tr", "ebma", "dmve")


class CommandError(RuntimeError):
    pass


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment file with 'key = value' lines")
    p.add_argument("--input", help="raw YUV 4:2:0 input (original sequence)")
    p.add_argument("--name")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--first-frame", type=int, help="first frame with losses (1-based)")
    p.add_argument("--last-frame", type=int, help="last frame with losses (1-based)")
    p.add_argument("--losses-per-frame", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--align", type=int)
    p.add_argument("--fill", type=int)
    p.add_argument("--lossmap", help="loss map file (read if present, else generated)")
    p.add_argument("--corrupted", help="write the corrupted sequence here")
    p.add_argument("--threads", type=int)


def _add_conceal_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", type=str.lower, choices=METHODS)
    p.add_argument("--refine", dest="refine", action="store_true", default=None)
    p.add_argument("--no-refine", dest="refine", action="store_false")
    p.add_argument("--block-size", type=int)
    p.add_argument("--border", type=int)
    p.add_argument("--match-border", type=int)
    p.add_argument("--search-range", type=int)
    p.add_argument("--rho-hat", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--e-max", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--reference", choices=("concealed_prev", "original_prev"))


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", help="per-frame PSNR report")
    p.add_argument("--plot", help="per-frame PSNR figure (PNG)")
    p.add_argument("--frames-dir", help="dump concealed frames with losses as PGM")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stconceal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="place block losses and write the corrupted video")
    _add_spec_flags(p)

    p = sub.add_parser("conceal", help="conceal losses and report PSNR over lost blocks")
    _add_spec_flags(p)
    _add_conceal_flags(p)
    _add_report_flags(p)
    p.add_argument("--output", help="write the concealed sequence here")
    p.add_argument("--save-config", help="write the effective experiment file here")

    p = sub.add_parser("evaluate", help="PSNR of an already concealed video")
    _add_spec_flags(p)
    _add_report_flags(p)
    p.add_argument("concealed", help="concealed raw YUV 4:2:0 file")

    p = sub.add_parser("table", help="direct vs refined PSNR per method and sequence")
    p.add_argument("specs", nargs="*", help="experiment files, one per sequence")
    p.add_argument("--methods", default=",".join(METHODS),
                   help="comma separated subset of tr,ebma,dmve")
    p.add_argument("--out-dir", help="write per-run CSVs and per-frame figures here")
    p.add_argument("--iterations", type=int)
    p.add_argument("--threads", type=int)
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    spec = ExperimentSpec.load(args.config) if getattr(args, "config", None) else ExperimentSpec()
    overrides = {}
    for f in fields(ExperimentSpec):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return spec.update(overrides)


def _load_input(spec: ExperimentSpec) -> Sequence:
    path = spec.input_path()
    if not spec.input:
        raise CommandError("no input sequence given (--input or 'input =' in the config)")
    if not path.is_file():
        raise CommandError(f"input file not found: {path}")
    return read_yuv420(path, spec.width, spec.height)


def _loss_map(spec: ExperimentSpec, seq: Sequence) -> LossMap:
    if spec.lossmap and Path(spec.lossmap).is_file():
        lmap = LossMap.load(spec.lossmap)
        if (lmap.width, lmap.height) != (seq.width, seq.height):
            raise CommandError(f"{spec.lossmap}: loss map is {lmap.width}x{lmap.height}")
        return lmap
    first, last = spec.frame_range
    last = min(last, len(seq) - 1)
    return generate_losses(seq.width, seq.height, (first, last), spec.losses_per_frame,
                           spec.block_size, spec.seed, spec.align or None)


def cmd_simulate(spec: ExperimentSpec) -> LossMap:
    seq = _load_input(spec)
    first, last = spec.frame_range
    lmap = generate_losses(seq.width, seq.height, (first, min(last, len(seq) - 1)),
                           spec.losses_per_frame, spec.block_size, spec.seed, spec.align or None)
    if spec.lossmap:
        lmap.save(spec.lossmap)
    if spec.corrupted:
        write_yuv420(apply_losses(seq, lmap, spec.fill), spec.corrupted)
    print(f"{len(lmap)} blocks")
    return lmap


def _write_reports(spec: ExperimentSpec, report, concealed: Sequence, lmap: LossMap,
                   label: str) -> None:
    if spec.csv:
        metrics.write_report_csv(report, spec.csv)
    if spec.plot:
        from .plotting import plot_psnr_per_frame

        plot_psnr_per_frame({label: report}, spec.plot, title=spec.name)
    if spec.frames_dir:
        out = Path(spec.frames_dir)
        out.mkdir(parents=True, exist_ok=True)
        for t in lmap.frames():
            write_frame_image(concealed[t], out / f"{spec.name}_{t + 1:04d}.pgm")


def run_conceal(spec: ExperimentSpec, original: Sequence | None = None,
                lmap: LossMap | None = None):
    original = _load_input(spec) if original is None else original
    lmap = _loss_map(spec, original) if lmap is None else lmap
    corrupted = apply_losses(original, lmap, spec.fill)
    failures: list = []
    concealed = conceal_sequence(corrupted, lmap, original, spec.concealment(),
                                 threads=max(1, spec.threads), failures=failures)
    for t, x0, y0, exc in failures:
        log.warning("frame %d block (%d, %d) left unconcealed: %s", t + 1, x0, y0, exc)
    return concealed, metrics.psnr_lost_blocks(original, concealed, lmap), lmap


def _label(spec: ExperimentSpec) -> str:
    return f"{spec.method.upper()}{' refined' if spec.refine else ''}"


def _db(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def cmd_conceal(spec: ExperimentSpec):
    original = _load_input(spec)
    lmap = _loss_map(spec, original)
    if spec.lossmap and not Path(spec.lossmap).is_file():
        lmap.save(spec.lossmap)
    if spec.corrupted:
        write_yuv420(apply_losses(original, lmap, spec.fill), spec.corrupted)
    concealed, report, _ = run_conceal(spec, original, lmap)
    if spec.output:
        write_yuv420(concealed, spec.output)
    _write_reports(spec, report, concealed, lmap, _label(spec))
    print(f"{spec.name} {spec.method} {'refined' if spec.refine else 'direct'} "
          f"{_db(report.aggregate_psnr)} mean_of_frames={_db(report.mean_frame_psnr)} "
          f"blocks={report.blocks}")
    return report


def cmd_evaluate(spec: ExperimentSpec, concealed_path) -> metrics.EvaluationReport:
    original = _load_input(spec)
    lmap = _loss_map(spec, original)
    concealed = read_yuv420(concealed_path, spec.width, spec.height)
    if len(concealed) != len(original):
        raise CommandError(f"{concealed_path}: {len(concealed)} frames, original has {len(original)}")
    report = metrics.psnr_lost_blocks(original, concealed, lmap)
    _write_reports(spec, report, concealed, lmap, spec.name)
    print(f"{spec.name} {_db(report.aggregate_psnr)} mean_of_frames={_db(report.mean_frame_psnr)} "
          f"blocks={report.blocks}")
    return report


def cmd_table(specs: list[ExperimentSpec], methods=METHODS, out_dir=None) -> list[tuple]:
    """Run direct and refined concealment per method for every spec.

    Returns rows ``(sequence, method, direct_db, refined_db, gain_db)`` and
    prints them with 1-decimal dB values.
    """
    if not specs:
        raise CommandError("table needs at least one experiment file")
    rows = []
    out = Path(out_dir) if out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    print("sequence method direct refined gain")
    for spec in specs:
        original = _load_input(spec)
        lmap = _loss_map(spec, original)
        for method in methods:
            reports = {}
            for refine in (False, True):
                run = replace(spec, method=method, refine=refine)
                _, reports[refine], _ = run_conceal(run, original, lmap)
                if out:
                    metrics.write_report_csv(
                        reports[refine],
                        out / f"{spec.name}_{method}_{'refined' if refine else 'direct'}.csv")
            direct, refined = reports[False].aggregate_psnr, reports[True].aggregate_psnr
            row = (spec.name, method.upper(), direct, refined, metrics.gain_db(direct, refined))
            rows.append(row)
            print(metrics.summary_line(f"{spec.name} {method.upper()}", direct, refined), flush=True)
            if out:
                from .plotting import plot_psnr_per_frame

                plot_psnr_per_frame(
                    {method.upper(): reports[False], f"{method.upper()} refined": reports[True]},
                    out / f"{spec.name}_{method}_psnr.png", title=spec.name)
    return rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "table":
            if not args.specs:
                parser.error("table needs at least one experiment file")
            methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
            bad = [m for m in methods if m not in METHODS]
            if bad or not methods:
                parser.error(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
            specs = []
            for path in args.specs:
                spec = ExperimentSpec.load(path)
                if args.iterations is not None:
                    spec.iterations = args.iterations
                if args.threads is not None:
                    spec.threads = args.threads
                specs.append(spec)
            cmd_table(specs, methods, args.out_dir)
            return 0
        spec = spec_from_args(args)
        if args.command == "simulate":
            cmd_simulate(spec)
        elif args.command == "conceal":
            if args.save_config:
                spec.save(args.save_config)
            cmd_conceal(spec)
        elif args.command == "evaluate":
            cmd_evaluate(spec, args.concealed)
    except (CommandError, VideoFormatError, PlacementError, ValueError, OSError) as exc:
        print(f"stconceal: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
