import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stconceal.video_io import (
    Frame,
    Sequence,
    VideoFormatError,
    read_pgm,
    read_yuv420,
    write_frame_image,
    write_yuv420,
)

CIF = (352, 288)


def test_read_one_cif_frame(tmp_path):
    path = tmp_path / "one.yuv"
    path.write_bytes(bytes(152064))
    seq = read_yuv420(path, *CIF)
    assert len(seq) == 1
    assert seq[0].luma.shape == (288, 352)


def test_read_two_frames_skips_chroma(tmp_path):
    y = np.arange(352 * 288, dtype=np.uint32).astype(np.uint8)
    chroma = np.full(352 * 288 // 2, 7, np.uint8)
    path = tmp_path / "two.yuv"
    path.write_bytes((y.tobytes() + chroma.tobytes()) * 2)
    assert path.stat().st_size == 304128
    seq = read_yuv420(path, *CIF)
    assert len(seq) == 2
    assert [f.t for f in seq] == [0, 1]
    np.testing.assert_array_equal(seq[1].luma.ravel(), y)


def test_read_rejects_partial_frame(tmp_path):
    path = tmp_path / "bad.yuv"
    path.write_bytes(bytes(152065))
    with pytest.raises(VideoFormatError):
        read_yuv420(path, *CIF)


def test_read_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_yuv420(tmp_path / "nope.yuv", *CIF)


def test_write_cif_size(tmp_path):
    seq = Sequence.from_arrays([np.zeros((288, 352), np.uint8)])
    path = tmp_path / "out.yuv"
    write_yuv420(seq, path)
    data = path.read_bytes()
    assert len(data) == 152064
    assert set(data[352 * 288 :]) == {128}


def test_write_empty_sequence(tmp_path):
    path = tmp_path / "empty.yuv"
    write_yuv420(Sequence(), path)
    assert path.stat().st_size == 0


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(0, 3),
    w=st.integers(1, 12).map(lambda v: 2 * v),
    h=st.integers(1, 12).map(lambda v: 2 * v),
    seed=st.integers(0, 2**32 - 1),
)
def test_luma_round_trip(tmp_path_factory, n, w, h, seed):
    rng = np.random.default_rng(seed)
    seq = Sequence.from_arrays([rng.integers(0, 256, (h, w), dtype=np.uint8) for _ in range(n)])
    path = tmp_path_factory.mktemp("rt") / "seq.yuv"
    write_yuv420(Sequence(seq.frames, w, h), path)
    back = read_yuv420(path, w, h)
    assert len(back) == n
    for a, b in zip(seq, back):
        np.testing.assert_array_equal(a.luma, b.luma)


def test_pgm_bytes(tmp_path):
    frame = Frame(np.array([[0, 255], [128, 64]], np.uint8))
    path = tmp_path / "f.pgm"
    write_frame_image(frame, path)
    assert path.read_bytes() == b"P5 2 2 255\n" + bytes([0x00, 0xFF, 0x80, 0x40])


def test_pgm_cif_header_and_round_trip(tmp_path, rng):
    luma = rng.integers(0, 256, (288, 352), dtype=np.uint8)
    path = tmp_path / "cif.pgm"
    write_frame_image(Frame(luma), path)
    assert path.read_bytes().startswith(b"P5 352 288 255\n")
    np.testing.assert_array_equal(read_pgm(path).luma, luma)


def test_frame_invariants():
    with pytest.raises(ValueError):
        Frame(np.array([[300]]))
    f = Frame(np.zeros((2, 4)))
    assert (f.width, f.height) == (4, 2)
    assert f.luma.size == f.width * f.height
    with pytest.raises(ValueError):
        f.luma[0, 0] = 1


def test_sequence_requires_uniform_dimensions():
    with pytest.raises(ValueError):
        Sequence.from_arrays([np.zeros((2, 2)), np.zeros((4, 4))])
    with pytest.raises(ValueError):
        Sequence((Frame(np.zeros((2, 2)), t=1),))
