"""PSNR over concealed samples only."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .loss_sim import LossMap
from .video_io import Sequence

PEAK = 255.0


def psnr_from_mse(mse: float) -> float:
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


@dataclass
class FrameStats:
    frame: int
    sse: int
    blocks: int
    samples: int

    @property
    def psnr(self) -> float:
        return psnr_from_mse(self.sse / self.samples)


@dataclass
class EvaluationReport:
    """Per-frame squared-error sums; PSNR values derive from them.

    ``aggregate_psnr`` pools the squared error of all lost samples;
    ``mean_frame_psnr`` averages the per-frame dB values (infinite when any
    frame is perfect).
    """

    frames: list[FrameStats] = field(default_factory=list)

    @property
    def blocks(self) -> int:
        return sum(f.blocks for f in self.frames)

    @property
    def samples(self) -> int:
        return sum(f.samples for f in self.frames)

    @property
    def pooled_mse(self) -> float:
        if not self.samples:
            return math.nan
        return sum(f.sse for f in self.frames) / self.samples

    @property
    def aggregate_psnr(self) -> float:
        return psnr_from_mse(self.pooled_mse) if self.samples else math.nan

    @property
    def mean_frame_psnr(self) -> float:
        if not self.frames:
            return math.nan
        return float(np.mean([f.psnr for f in self.frames]))

    def per_frame(self) -> tuple[list[int], list[float]]:
        return [f.frame for f in self.frames], [f.psnr for f in self.frames]


def psnr_lost_blocks(original: Sequence, concealed: Sequence, lmap: LossMap) -> EvaluationReport:
    if (original.width, original.height) != (concealed.width, concealed.height):
        raise ValueError("original and concealed sequences differ in size")
    if (original.width, original.height) != (lmap.width, lmap.height):
        raise ValueError("loss map does not match the sequence size")
    report = EvaluationReport()
    for t in lmap.frames():
        if t >= len(original) or t >= len(concealed):
            raise ValueError(f"loss map references frame {t} beyond the sequence")
        a, b = original[t].luma, concealed[t].luma
        sse = samples = 0
        blocks = lmap.blocks(t)
        for loss in blocks:
            d = a[loss.slices].astype(np.int64) - b[loss.slices].astype(np.int64)
            sse += int(np.dot(d.ravel(), d.ravel()))
            samples += d.size
        report.frames.append(FrameStats(t, sse, len(blocks), samples))
    return report


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.4f}"


def write_report_csv(report: EvaluationReport, path) -> None:
    """Per-frame rows (1-based frame numbers) followed by ``aggregate`` and ``mean_of_frames`` rows."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["frame", "psnr_db", "blocks", "samples"])
        for f in report.frames:
            out.writerow([f.frame + 1, _fmt(f.psnr), f.blocks, f.samples])
        out.writerow(["aggregate", _fmt(report.aggregate_psnr), report.blocks, report.samples])
        out.writerow(["mean_of_frames", _fmt(report.mean_frame_psnr), report.blocks, report.samples])


def read_report_csv(path) -> dict:
    """Parse a report CSV into ``{"frames": [(frame, psnr, blocks, samples)], "aggregate": ..., "mean_of_frames": ...}``.

    Frame numbers come back 0-based.
    """
    result = {"frames": []}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            psnr = float(row["psnr_db"])
            if row["frame"] in ("aggregate", "mean_of_frames"):
                result[row["frame"]] = psnr
            else:
                result["frames"].append(
                    (int(row["frame"]) - 1, psnr, int(row["blocks"]), int(row["samples"]))
                )
    return result


def summary_line(name: str, direct_db: float, refined_db: float) -> str:
    """Table-style line ``name direct refined gain`` with 1-decimal dB values.

    The gain is the difference of the two rounded columns, so the printed
    line is always self-consistent.
    """
    direct, refined = round(direct_db, 1), round(refined_db, 1)
    return f"{name} {direct:.1f} {refined:.1f} {gain_db(direct, refined):.1f}"


def gain_db(direct_db: float, refined_db: float) -> float:
    if math.isinf(direct_db) and math.isinf(refined_db):
        return 0.0
    return round(round(refined_db, 1) - round(direct_db, 1), 1)
