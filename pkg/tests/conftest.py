import numpy as np
import pytest

from stconceal.video_io import Sequence


def smooth_texture(rng, height, width, n_waves=6, noise=2.0):
    """Band-limited random texture in [0, 255]."""
    y, x = np.mgrid[0:height, 0:width].astype(float)
    img = np.full((height, width), 128.0)
    for _ in range(n_waves):
        fy, fx = rng.uniform(-0.15, 0.15, size=2)
        img += rng.uniform(10, 30) * np.sin(2 * np.pi * (fy * y + fx * x) + rng.uniform(0, 2 * np.pi))
    img += rng.normal(0, noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def translated_pair(texture, height, width, x_d, y_d, margin):
    """(cur, prev) with prev[y + y_d, x + x_d] == cur[y, x] everywhere."""
    cur = texture[margin : margin + height, margin : margin + width]
    prev = texture[margin - y_d : margin - y_d + height, margin - x_d : margin - x_d + width]
    return cur.copy(), prev.copy()


def panning_sequence(rng, n_frames, height, width, step=(1, 0)):
    """Frames cut from one large texture with a constant integer pan."""
    sx, sy = step
    pad = 2 * max(abs(sx), abs(sy)) * n_frames + 2
    tex = smooth_texture(rng, height + pad, width + pad)
    frames = []
    for t in range(n_frames):
        oy, ox = pad // 2 + sy * t - sy * n_frames // 2, pad // 2 + sx * t - sx * n_frames // 2
        frames.append(tex[oy : oy + height, ox : ox + width])
    return Sequence.from_arrays(frames)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion and assert it."""
    log = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def check(number, title, ok, detail=""):
        log.append((number, title, bool(ok), detail))
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE_KEY, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(log, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
