"""Raw planar YUV 4:2:0 and PGM frame I/O.

Only the luma plane is kept in memory. Chroma is skipped on read and written
back as flat mid-gray.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence as _Seq

import numpy as np


class VideoFormatError(ValueError):
    """Raised when a file does not match the declared raw video layout."""


@dataclass(frozen=True)
class Frame:
    """One 8-bit luma plane, stored as a read-only ``(height, width)`` array."""

    luma: np.ndarray
    t: int = 0

    def __post_init__(self):
        luma = np.asarray(self.luma)
        if luma.ndim != 2:
            raise ValueError(f"luma must be 2-D, got shape {luma.shape}")
        if luma.dtype != np.uint8:
            if luma.size and (luma.min() < 0 or luma.max() > 255):
                raise ValueError("luma samples must lie in [0, 255]")
            luma = luma.astype(np.uint8)
        luma = np.array(luma, dtype=np.uint8, copy=True)
        luma.setflags(write=False)
        object.__setattr__(self, "luma", luma)

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    def with_luma(self, luma: np.ndarray) -> "Frame":
        return Frame(luma, self.t)


@dataclass(frozen=True)
class Sequence:
    """Ordered frames with identical dimensions and indices 0..n-1."""

    frames: tuple = field(default_factory=tuple)
    width: int = 0
    height: int = 0

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not frames:
            return
        w, h = frames[0].width, frames[0].height
        if self.width == 0 and self.height == 0:
            object.__setattr__(self, "width", w)
            object.__setattr__(self, "height", h)
        for i, fr in enumerate(frames):
            if (fr.width, fr.height) != (self.width, self.height):
                raise ValueError(
                    f"frame {i} is {fr.width}x{fr.height}, "
                    f"expected {self.width}x{self.height}"
                )
            if fr.t != i:
                raise ValueError(f"frame at position {i} carries index {fr.t}")

    @classmethod
    def from_arrays(cls, planes: _Seq[np.ndarray]) -> "Sequence":
        return cls(tuple(Frame(p, t) for t, p in enumerate(planes)))

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i: int) -> Frame:
        return self.frames[i]

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def as_array(self) -> np.ndarray:
        """Stack all luma planes into a ``(frames, height, width)`` array."""
        if not self.frames:
            return np.zeros((0, self.height, self.width), dtype=np.uint8)
        return np.stack([f.luma for f in self.frames])


def _frame_bytes(width: int, height: int) -> int:
    return width * height * 3 // 2


def read_yuv420(path, width: int, height: int) -> Sequence:
    """Read the Y planes of a raw planar 4:2:0 file.

    Raises :class:`VideoFormatError` if the file size is not a whole number of
    pictures, and ``OSError`` if the file cannot be read.
    """
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise VideoFormatError(f"dimensions must be positive and even, got {width}x{height}")
    with open(path, "rb") as fh:
        data = fh.read()
    size = _frame_bytes(width, height)
    if len(data) % size:
        raise VideoFormatError(
            f"{os.fspath(path)}: {len(data)} bytes is not a multiple of "
            f"{size} ({width}x{height} 4:2:0)"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, size)
    luma = raw[:, : width * height].reshape(-1, height, width)
    return Sequence(tuple(Frame(p, t) for t, p in enumerate(luma)), width, height)


def write_yuv420(seq: Sequence, path) -> None:
    """Write ``seq`` as raw 4:2:0 with constant 128 chroma."""
    chroma = np.full(2 * (seq.width // 2) * (seq.height // 2), 128, dtype=np.uint8).tobytes()
    with open(path, "wb") as fh:
        for frame in seq:
            fh.write(np.ascontiguousarray(frame.luma).tobytes())
            fh.write(chroma)


def write_frame_image(frame: Frame, path) -> None:
    """Dump the luma plane as a binary PGM (P5)."""
    with open(path, "wb") as fh:
        fh.write(f"P5 {frame.width} {frame.height} 255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(frame.luma).tobytes())


def read_pgm(path) -> Frame:
    """Read a binary 8-bit PGM such as those produced by :func:`write_frame_image`."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    if tokens[0] != b"P5" or int(tokens[3]) != 255:
        raise VideoFormatError(f"{os.fspath(path)}: not an 8-bit binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    plane = np.frombuffer(data[pos : pos + w * h], dtype=np.uint8)
    if plane.size != w * h:
        raise VideoFormatError(f"{os.fspath(path)}: truncated pixel data")
    return Frame(plane.reshape(h, w))
