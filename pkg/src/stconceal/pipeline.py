"""Per-block and per-sequence concealment.

Order of operations for one lost block: temporal extrapolation, border error
estimate, block weight and weighting function, projection area assembly,
model generation, block cut-out.

Frames are processed in temporal order because the default reference is the
already concealed previous frame. Blocks inside one frame are independent:
losses are isolated, so no block's projection area or matching border
touches another lost block, and blocks may be concealed concurrently.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import fse
from .loss_sim import BlockLoss, LossMap
from .temporal import Method, TemporalEstimate, extrapolate
from .video_io import Frame, Sequence

log = logging.getLogger(__name__)

REFERENCES = ("concealed_prev", "original_prev")


class ConcealmentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConcealmentConfig:
    method: Method = Method.DMVE
    refine: bool = True
    block_size: int = 16
    border: int = 8
    match_border: int | None = None
    search_range: int = 16
    rho_hat: float = 0.8
    gamma: float = 0.75
    e_max: float = 25.0
    iterations: int = 200
    reference: str = "concealed_prev"

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(str(getattr(self.method, "value", self.method))))
        if self.reference not in REFERENCES:
            raise ValueError(f"reference must be one of {REFERENCES}, got {self.reference!r}")

    def replace(self, **changes) -> "ConcealmentConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class BlockResult:
    loss: BlockLoss
    block: np.ndarray
    estimate: TemporalEstimate
    mu: float | None = None
    model: fse.ModelState | None = None


def projection_area(cur: np.ndarray, loss: BlockLoss, temporal_block: np.ndarray) -> fse.ProjectionArea:
    """Assemble the ``3B x 3B`` area: received neighbours around the temporal estimate."""
    B = loss.size
    y, x = loss.y0 - B, loss.x0 - B
    h, w = cur.shape
    if y < 0 or x < 0 or y + 3 * B > h or x + 3 * B > w:
        raise ConcealmentError(f"projection area of block at ({loss.x0}, {loss.y0}) leaves the frame")
    f = cur[y : y + 3 * B, x : x + 3 * B].astype(np.float64)
    f[B : 2 * B, B : 2 * B] = temporal_block
    return fse.ProjectionArea.centered(f, B)


def conceal_block(cur, prev, loss: BlockLoss, cfg: ConcealmentConfig = ConcealmentConfig(),
                  valid: np.ndarray | None = None, keep_model: bool = False) -> BlockResult:
    """Conceal one lost block of ``cur`` using ``prev`` as the reference frame."""
    if prev is None:
        raise ConcealmentError(f"no reference frame for block at ({loss.x0}, {loss.y0})")
    cur_luma = cur.luma if isinstance(cur, Frame) else np.asarray(cur)
    est = extrapolate(cur_luma, prev, loss, cfg.method, cfg.search_range, cfg.border,
                      cfg.match_border, valid)
    if not cfg.refine:
        return BlockResult(loss, est.block, est)
    mu = fse.compute_mu(est.e_hat_t, cfg.e_max, cfg.rho_hat, loss.size)
    area = projection_area(cur_luma, loss, est.block)
    weights = fse.build_weights(area, mu, cfg.rho_hat)
    model = fse.generate_model(area, weights, cfg.iterations, cfg.gamma)
    block = fse.refine_block(area, model.g)
    return BlockResult(loss, block, est, mu, model if keep_model else None)


def conceal_frame(cur: Frame, prev, blocks: list[BlockLoss], cfg: ConcealmentConfig,
                  valid: np.ndarray | None = None, threads: int = 1) -> tuple[Frame, list]:
    """Conceal every loss of one frame; returns the new frame and per-block failures."""
    out = cur.luma.copy()
    failures = []

    def work(loss):
        try:
            return conceal_block(cur.luma, prev, loss, cfg, valid)
        except Exception as exc:  # reported per block, remaining blocks continue
            return exc

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    for loss, res in zip(blocks, results):
        if isinstance(res, Exception):
            failures.append((cur.t, loss.x0, loss.y0, res))
            log.warning("frame %d block (%d, %d): %s", cur.t, loss.x0, loss.y0, res)
            continue
        out[loss.slices] = res.block
    return Frame(out, cur.t), failures


def conceal_sequence(corrupted: Sequence, lmap: LossMap, original_refs: Sequence | None = None,
                     cfg: ConcealmentConfig = ConcealmentConfig(), threads: int = 1,
                     failures: list | None = None) -> Sequence:
    """Conceal all losses of ``lmap`` in temporal order, blocks in raster order.

    Blocks that cannot be concealed (e.g. losses in the first frame) keep their
    corrupted samples and are appended to ``failures`` as
    ``(frame, x0, y0, exception)``.
    """
    if (corrupted.width, corrupted.height) != (lmap.width, lmap.height):
        raise ValueError("loss map and sequence dimensions differ")
    if cfg.reference == "original_prev" and original_refs is None:
        raise ValueError("reference 'original_prev' needs the original sequence")
    failures = [] if failures is None else failures
    frames: list[Frame] = []
    for frame in corrupted:
        blocks = lmap.blocks(frame.t)
        if not blocks:
            frames.append(frame)
            continue
        if frame.t == 0:
            prev = None
        elif cfg.reference == "original_prev":
            prev = original_refs[frame.t - 1]
        else:
            prev = frames[frame.t - 1]
        if prev is None:
            for b in blocks:
                exc = ConcealmentError("first frame has no reference frame")
                failures.append((frame.t, b.x0, b.y0, exc))
                log.warning("frame %d block (%d, %d): %s", frame.t, b.x0, b.y0, exc)
            frames.append(frame)
            continue
        done, errs = conceal_frame(frame, prev, blocks, cfg, lmap.mask(frame.t), threads)
        failures.extend(errs)
        frames.append(done)
    return Sequence(tuple(frames), corrupted.width, corrupted.height)
