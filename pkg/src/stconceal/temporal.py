"""Preliminary temporal extrapolation of a lost block.

All three estimators copy a ``B x B`` block from the previous frame; they
differ only in how the displacement is chosen. EBMA and DMVE both minimise
the sum of squared differences between a ring of received samples around the
loss and the same ring displaced into the previous frame. EBMA uses a ring one
sample wide, DMVE a wider one (8 samples by default).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .loss_sim import BlockLoss
from .video_io import Frame


class EstimatorError(RuntimeError):
    """The border used for matching or evaluation has no valid samples."""


class Method(str, Enum):
    TR = "TR"
    EBMA = "EBMA"
    DMVE = "DMVE"

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name.upper())
        except ValueError:
            raise ValueError(f"unknown method {name!r}, expected one of tr, ebma, dmve") from None


@dataclass(frozen=True)
class Displacement:
    x_d: int = 0
    y_d: int = 0


@dataclass(frozen=True)
class TemporalEstimate:
    method: Method
    d: Displacement
    e_hat_t: float
    block: np.ndarray


def _luma(frame) -> np.ndarray:
    return frame.luma if isinstance(frame, Frame) else np.asarray(frame)


def ring_mask(block_size: int, width: int) -> np.ndarray:
    """Boolean ``(B+2w, B+2w)`` mask that is True on the ring around a centred block."""
    side = block_size + 2 * width
    mask = np.ones((side, side), dtype=bool)
    mask[width : width + block_size, width : width + block_size] = False
    return mask


def _border(cur, loss: BlockLoss, width: int, valid: np.ndarray | None):
    """Ring patch of ``cur`` around ``loss`` and the mask of samples that may be used."""
    cur = _luma(cur)
    h, w = cur.shape
    B = loss.size
    y, x = loss.y0 - width, loss.x0 - width
    side = B + 2 * width
    mask = ring_mask(B, width)
    patch = np.zeros((side, side), dtype=np.int64)
    # clip the ring to the frame; samples outside count as invalid
    y_lo, x_lo = max(y, 0), max(x, 0)
    y_hi, x_hi = min(y + side, h), min(x + side, w)
    inside = np.zeros_like(mask)
    inside[y_lo - y : y_hi - y, x_lo - x : x_hi - x] = True
    patch[y_lo - y : y_hi - y, x_lo - x : x_hi - x] = cur[y_lo:y_hi, x_lo:x_hi]
    mask &= inside
    if valid is not None:
        vpatch = np.zeros_like(mask)
        vpatch[y_lo - y : y_hi - y, x_lo - x : x_hi - x] = valid[y_lo:y_hi, x_lo:x_hi]
        mask &= vpatch
    return patch, mask


def border_search(
    cur,
    prev,
    loss: BlockLoss,
    search_range: int,
    width: int,
    valid: np.ndarray | None = None,
) -> Displacement:
    """Exhaustive integer search minimising the ring SSD.

    Candidates whose displaced block or ring would leave ``prev`` are skipped.
    Ties go to the smallest ``|x_d| + |y_d|``, then raster order (``y_d``
    first, then ``x_d``).
    """
    patch, mask = _border(cur, loss, width, valid)
    if not mask.any():
        raise EstimatorError(f"no valid border samples around block at ({loss.x0}, {loss.y0})")
    ref = _luma(prev)
    h, w = ref.shape
    side = loss.size + 2 * width
    y_base, x_base = loss.y0 - width, loss.x0 - width
    yd_lo = max(-search_range, -y_base)
    yd_hi = min(search_range, h - side - y_base)
    xd_lo = max(-search_range, -x_base)
    xd_hi = min(search_range, w - side - x_base)
    if yd_lo > yd_hi or xd_lo > xd_hi:
        raise EstimatorError(f"no displacement keeps block at ({loss.x0}, {loss.y0}) inside the frame")

    region = ref[y_base + yd_lo : y_base + yd_hi + side, x_base + xd_lo : x_base + xd_hi + side]
    windows = sliding_window_view(region.astype(np.int64), (side, side))
    diff = windows - patch
    cost = np.einsum("abij,ij->ab", diff * diff, mask.astype(np.int64))

    yd = np.arange(yd_lo, yd_hi + 1)[:, None]
    xd = np.arange(xd_lo, xd_hi + 1)[None, :]
    best = cost == cost.min()
    l1 = np.where(best, np.abs(yd) + np.abs(xd), np.iinfo(np.int64).max)
    # argmin on the flattened row-major array realises the raster-order tie-break
    i, j = np.unravel_index(np.argmin(l1), l1.shape)
    return Displacement(int(xd_lo + j), int(yd_lo + i))


def temporal_replacement(prev, loss: BlockLoss) -> Displacement:
    return Displacement(0, 0)


def ebma(cur, prev, loss: BlockLoss, search_range: int = 16,
         valid: np.ndarray | None = None) -> Displacement:
    """Extended boundary matching over the one-sample ring around the loss."""
    return border_search(cur, prev, loss, search_range, 1, valid)


def dmve(cur, prev, loss: BlockLoss, search_range: int = 16, match_border: int = 8,
         valid: np.ndarray | None = None) -> Displacement:
    """Decoder motion vector estimation over a ``match_border``-wide ring."""
    return border_search(cur, prev, loss, search_range, match_border, valid)


def estimate_temporal_error(cur, prev, loss: BlockLoss, d: Displacement, border: int = 8,
                            valid: np.ndarray | None = None) -> float:
    """Root-mean-square difference between the border in ``cur`` and the displaced border in ``prev``.

    Border samples whose displaced position falls outside ``prev`` are left
    out, like samples marked invalid in ``valid``.
    """
    patch, mask = _border(cur, loss, border, valid)
    ref = _luma(prev)
    h, w = ref.shape
    side = loss.size + 2 * border
    y, x = loss.y0 - border + d.y_d, loss.x0 - border + d.x_d
    shifted = np.zeros_like(patch)
    y_lo, x_lo = max(y, 0), max(x, 0)
    y_hi, x_hi = min(y + side, h), min(x + side, w)
    inside = np.zeros_like(mask)
    if y_lo < y_hi and x_lo < x_hi:
        inside[y_lo - y : y_hi - y, x_lo - x : x_hi - x] = True
        shifted[y_lo - y : y_hi - y, x_lo - x : x_hi - x] = ref[y_lo:y_hi, x_lo:x_hi]
    mask &= inside
    n = int(mask.sum())
    if n == 0:
        raise EstimatorError(f"no usable border samples around block at ({loss.x0}, {loss.y0}) for {d}")
    diff = (patch - shifted)[mask]
    return float(np.sqrt(np.dot(diff, diff) / n))


def displaced_block(prev, loss: BlockLoss, d: Displacement) -> np.ndarray:
    ref = _luma(prev)
    y, x = loss.y0 + d.y_d, loss.x0 + d.x_d
    B = loss.size
    if y < 0 or x < 0 or y + B > ref.shape[0] or x + B > ref.shape[1]:
        raise EstimatorError(f"displaced block for {d} leaves the previous frame")
    return ref[y : y + B, x : x + B].copy()


def extrapolate(
    cur,
    prev,
    loss: BlockLoss,
    method: Method = Method.DMVE,
    search_range: int = 16,
    border: int = 8,
    match_border: int | None = None,
    valid: np.ndarray | None = None,
) -> TemporalEstimate:
    """Choose a displacement with ``method``, copy the block and evaluate it on the border.

    Estimator failures fall back to temporal replacement.
    """
    method = Method(method)
    d = Displacement(0, 0)
    try:
        if method is Method.EBMA:
            d = ebma(cur, prev, loss, search_range, valid)
        elif method is Method.DMVE:
            d = dmve(cur, prev, loss, search_range,
                     border if match_border is None else match_border, valid)
    except EstimatorError:
        d = Displacement(0, 0)
    try:
        e_hat = estimate_temporal_error(cur, prev, loss, d, border, valid)
    except EstimatorError:
        if d == Displacement(0, 0):
            raise
        d = Displacement(0, 0)
        e_hat = estimate_temporal_error(cur, prev, loss, d, border, valid)
    return TemporalEstimate(method, d, e_hat, displaced_block(prev, loss, d))
