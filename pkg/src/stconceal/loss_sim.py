"""Reproducible isolated block-loss patterns.

Positions are drawn with SplitMix64 so a LossMap can be regenerated bit for
bit from its header in any language::

    state = seed mod 2**64
    next():
        state = (state + 0x9E3779B97F4A7C15) mod 2**64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
        return z ^ (z >> 31)

For each frame in the range (ascending), candidates are the top-left corners
``(x0, y0)`` on the ``align`` grid with ``B <= x0 <= width - 2B`` and
``B <= y0 <= height - 2B``, enumerated row-major (y0 outer). Each draw picks
candidate ``next() % n_candidates``; it is accepted if its Chebyshev gap to
every already accepted block of the frame is at least ``B`` samples. One
generator stream is shared by all frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .video_io import Frame, Sequence

MASK64 = (1 << 64) - 1


class PlacementError(RuntimeError):
    """Raised when the isolation constraints cannot be met for a frame."""


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


@dataclass(frozen=True, order=True)
class BlockLoss:
    """A lost ``size x size`` block with its top-left corner at ``(x0, y0)``."""

    y0: int
    x0: int
    size: int = 16

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.y0, self.y0 + self.size), slice(self.x0, self.x0 + self.size)

    def gap(self, other: "BlockLoss") -> int:
        """Chebyshev distance between the two bounding boxes (0 if they overlap or touch)."""
        dx = max(other.x0 - (self.x0 + self.size), self.x0 - (other.x0 + other.size), 0)
        dy = max(other.y0 - (self.y0 + self.size), self.y0 - (other.y0 + other.size), 0)
        return max(dx, dy)


@dataclass
class LossMap:
    """Lost blocks per frame (0-based frame index) plus generation parameters."""

    width: int
    height: int
    losses: dict[int, list[BlockLoss]] = field(default_factory=dict)
    params: dict[str, int] = field(default_factory=dict)

    def frames(self) -> list[int]:
        return sorted(t for t, blocks in self.losses.items() if blocks)

    def blocks(self, t: int) -> list[BlockLoss]:
        return sorted(self.losses.get(t, ()))

    def __len__(self) -> int:
        return sum(len(b) for b in self.losses.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LossMap):
            return NotImplemented
        return (
            (self.width, self.height) == (other.width, other.height)
            and self.frames() == other.frames()
            and all(self.blocks(t) == other.blocks(t) for t in self.frames())
        )

    def mask(self, t: int) -> np.ndarray:
        """Boolean validity mask for frame ``t``; False marks lost samples."""
        valid = np.ones((self.height, self.width), dtype=bool)
        for b in self.losses.get(t, ()):
            valid[b.slices] = False
        return valid

    def save(self, path) -> None:
        """Write one ``frame x0 y0 B`` line per loss, frame numbers 1-based."""
        header = " ".join(f"{k}={v}" for k, v in self.params.items())
        lines = [f"# lossmap width={self.width} height={self.height} {header}".rstrip()]
        for t in self.frames():
            for b in self.blocks(t):
                lines.append(f"{t + 1} {b.x0} {b.y0} {b.size}")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "LossMap":
        width = height = None
        params: dict[str, int] = {}
        losses: dict[int, list[BlockLoss]] = {}
        with open(path, encoding="ascii") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if "=" in tok:
                            k, v = tok.split("=", 1)
                            if k == "width":
                                width = int(v)
                            elif k == "height":
                                height = int(v)
                            else:
                                params[k] = int(v)
                    continue
                parts = line.split()
                if len(parts) != 4:
                    raise ValueError(f"{path}:{lineno}: expected 'frame x0 y0 B'")
                frame, x0, y0, size = map(int, parts)
                losses.setdefault(frame - 1, []).append(BlockLoss(y0, x0, size))
        if width is None or height is None:
            raise ValueError(f"{path}: header must declare width and height")
        return cls(width, height, losses, params)


def generate_losses(
    width: int,
    height: int,
    frame_range: tuple[int, int],
    losses_per_frame: int,
    block_size: int = 16,
    seed: int = 1,
    align: int | None = None,
    max_draws: int = 100_000,
) -> LossMap:
    """Place ``losses_per_frame`` isolated blocks in every frame of ``frame_range``.

    ``frame_range`` is 0-based and inclusive. ``align`` defaults to the block
    size (macroblock grid); ``align=1`` allows any sample position.
    """
    B = block_size
    align = B if align is None else align
    first, last = frame_range
    params = dict(seed=seed, first=first + 1, last=last + 1,
                  per_frame=losses_per_frame, B=B, align=align)
    lmap = LossMap(width, height, {}, params)
    if losses_per_frame <= 0:
        return lmap

    def grid(lo, hi):
        start = -(-lo // align) * align
        return list(range(start, hi + 1, align))

    xs, ys = grid(B, width - 2 * B), grid(B, height - 2 * B)
    candidates = [(x, y) for y in ys for x in xs]
    if not candidates:
        raise PlacementError(f"frame {first}: {width}x{height} leaves no room for {B}x{B} losses")

    rng = SplitMix64(seed)
    n = len(candidates)
    for t in range(first, last + 1):
        placed: list[BlockLoss] = []
        draws = 0
        while len(placed) < losses_per_frame:
            if draws >= max_draws:
                raise PlacementError(
                    f"frame {t}: placed {len(placed)} of {losses_per_frame} "
                    f"isolated losses after {max_draws} draws"
                )
            draws += 1
            x, y = candidates[rng.next() % n]
            cand = BlockLoss(y, x, B)
            if all(cand.gap(p) >= B for p in placed):
                placed.append(cand)
        lmap.losses[t] = sorted(placed)
    return lmap


def apply_losses(seq: Sequence, lmap: LossMap, fill: int = 0) -> Sequence:
    """Return a copy of ``seq`` with every lost sample set to ``fill``."""
    if (seq.width, seq.height) != (lmap.width, lmap.height):
        raise ValueError(
            f"loss map is {lmap.width}x{lmap.height}, sequence is {seq.width}x{seq.height}"
        )
    frames = []
    for frame in seq:
        blocks = lmap.losses.get(frame.t)
        if not blocks:
            frames.append(frame)
            continue
        luma = frame.luma.copy()
        for b in blocks:
            luma[b.slices] = fill
        frames.append(Frame(luma, frame.t))
    return Sequence(tuple(frames), seq.width, seq.height)
