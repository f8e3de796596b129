"""Experiment description stored as flat ``key = value`` text.

Keys (defaults in parentheses)::

    name             label used in reports ("sequence")
    input            raw 4:2:0 file; relative paths also try $STCONCEAL_CORPUS
    width, height    picture size (352, 288)
    first_frame      first frame with losses, 1-based (4)
    last_frame       last frame with losses, 1-based (150)
    losses_per_frame (25)
    seed             loss placement seed (1)
    align            loss position grid, 0 = block size (0)
    fill             sample value written into lost blocks (0)
    method           tr | ebma | dmve (dmve)
    refine           true | false (true)
    block_size (16), border (8), match_border (0 = border), search_range (16)
    rho_hat (0.8), gamma (0.75), e_max (25), iterations (200)
    reference        concealed_prev | original_prev (concealed_prev)
    lossmap, corrupted, output, csv, plot, frames_dir   artifact paths ("" = off)
    threads          worker threads per frame (1)

Lines starting with ``#`` are comments. Unknown keys are an error.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .pipeline import ConcealmentConfig
from .temporal import Method

CORPUS_ENV = "STCONCEAL_CORPUS"


@dataclass
class ExperimentSpec:
    name: str = "sequence"
    input: str = ""
    width: int = 352
    height: int = 288
    first_frame: int = 4
    last_frame: int = 150
    losses_per_frame: int = 25
    seed: int = 1
    align: int = 0
    fill: int = 0
    method: str = "dmve"
    refine: bool = True
    block_size: int = 16
    border: int = 8
    match_border: int = 0
    search_range: int = 16
    rho_hat: float = 0.8
    gamma: float = 0.75
    e_max: float = 25.0
    iterations: int = 200
    reference: str = "concealed_prev"
    lossmap: str = ""
    corrupted: str = ""
    output: str = ""
    csv: str = ""
    plot: str = ""
    frames_dir: str = ""
    threads: int = 1

    def __post_init__(self):
        self.method = Method.parse(str(self.method)).value.lower()

    @property
    def frame_range(self) -> tuple[int, int]:
        """Loss frame range as 0-based inclusive indices."""
        return self.first_frame - 1, self.last_frame - 1

    def concealment(self) -> ConcealmentConfig:
        return ConcealmentConfig(
            method=Method.parse(self.method),
            refine=self.refine,
            block_size=self.block_size,
            border=self.border,
            match_border=self.match_border or None,
            search_range=self.search_range,
            rho_hat=self.rho_hat,
            gamma=self.gamma,
            e_max=self.e_max,
            iterations=self.iterations,
            reference=self.reference,
        )

    def input_path(self) -> Path:
        path = Path(self.input)
        corpus = os.environ.get(CORPUS_ENV)
        if corpus and not path.is_absolute() and not path.exists():
            return Path(corpus) / path
        return path

    def update(self, values: dict) -> "ExperimentSpec":
        types = {f.name: f.type for f in fields(self)}
        for key, value in values.items():
            if key not in types:
                raise KeyError(f"unknown key {key!r}")
            setattr(self, key, _coerce(types[key], value))
        self.__post_init__()
        return self

    def dumps(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, origin: str = "<string>") -> "ExperimentSpec":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{origin}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        try:
            return cls().update(values)
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{origin}: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        return cls.loads(Path(path).read_text(encoding="utf-8"), str(path))


def _coerce(typ, value):
    if not isinstance(value, str):
        return value
    if typ in (bool, "bool"):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if typ in (int, "int"):
        return int(value)
    if typ in (float, "float"):
        return float(value)
    return value
