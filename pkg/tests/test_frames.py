import json

import numpy as np
import pytest
from PIL import Image

from seeflow.errors import DecodeError, DimensionMismatch, InputError, MissingFrame
from seeflow.frames import (
    FRAME_NAME_FORMAT,
    load_frame_sequence,
    sequence_from_arrays,
    write_frame_sequence,
)

from conftest import blank


def _write_png(path, array):
    Image.fromarray(array).save(path)


def test_load_three_frames_with_timestamps(tmp_path):
    for i in range(3):
        _write_png(tmp_path / FRAME_NAME_FORMAT.format(i), blank(480, 640, value=i * 10))
    seq = load_frame_sequence(tmp_path, fps=1.0)
    assert len(seq) == 3
    assert [f.timestamp_s for f in seq] == [0.0, 1.0, 2.0]
    assert seq.width == 640 and seq.height == 480
    assert seq[1].pixels[0, 0, 0] == 10


def test_empty_directory_is_missing_frame_zero(tmp_path):
    with pytest.raises(MissingFrame) as err:
        load_frame_sequence(tmp_path, fps=1.0)
    assert err.value.index == 0


def test_gap_names_first_missing_index(tmp_path):
    for i in (0, 1, 3):
        _write_png(tmp_path / FRAME_NAME_FORMAT.format(i), blank())
    with pytest.raises(MissingFrame) as err:
        load_frame_sequence(tmp_path, fps=1.0)
    assert err.value.index == 2


def test_dimension_mismatch_names_offending_index(tmp_path):
    _write_png(tmp_path / FRAME_NAME_FORMAT.format(0), blank(480, 640))
    _write_png(tmp_path / FRAME_NAME_FORMAT.format(1), blank(600, 800))
    with pytest.raises(DimensionMismatch) as err:
        load_frame_sequence(tmp_path, fps=1.0)
    assert err.value.index == 1


def test_undecodable_file_raises_decode_error(tmp_path):
    _write_png(tmp_path / FRAME_NAME_FORMAT.format(0), blank())
    (tmp_path / FRAME_NAME_FORMAT.format(1)).write_bytes(b"not a png")
    with pytest.raises(DecodeError):
        load_frame_sequence(tmp_path, fps=1.0)


def test_round_trip_is_pixel_identical(tmp_path):
    rng = np.random.default_rng(7)
    arrays = [rng.integers(0, 256, (32, 40, 3), dtype=np.uint8) for _ in range(4)]
    seq = sequence_from_arrays(arrays, fps=2.0, source_id="roundtrip")
    write_frame_sequence(seq, tmp_path)
    back = load_frame_sequence(tmp_path)
    assert back.fps == 2.0
    assert back.source_id == "roundtrip"
    assert len(back) == 4
    for a, b in zip(seq, back):
        assert np.array_equal(a.pixels, b.pixels)


def test_alpha_channel_dropped(tmp_path):
    rgba = np.full((8, 8, 4), 200, dtype=np.uint8)
    rgba[..., 3] = 10
    Image.fromarray(rgba, mode="RGBA").save(tmp_path / FRAME_NAME_FORMAT.format(0))
    seq = load_frame_sequence(tmp_path, fps=1.0)
    assert seq[0].pixels.shape == (8, 8, 3)
    assert (seq[0].pixels == 200).all()


def test_manifest_supplies_defaults_and_args_win(tmp_path):
    _write_png(tmp_path / FRAME_NAME_FORMAT.format(0), blank())
    (tmp_path / "manifest.json").write_text(
        json.dumps({"source_id": "cast42", "fps": 2.0, "frame_count": 1})
    )
    seq = load_frame_sequence(tmp_path)
    assert seq.source_id == "cast42"
    assert seq.fps == 2.0
    override = load_frame_sequence(tmp_path, fps=5.0, source_id="other")
    assert override.fps == 5.0 and override.source_id == "other"


def test_load_rejects_bad_fps(tmp_path):
    _write_png(tmp_path / FRAME_NAME_FORMAT.format(0), blank())
    with pytest.raises(InputError):
        load_frame_sequence(tmp_path, fps=0)


def test_sequence_rejects_mixed_resolutions():
    with pytest.raises(ValueError):
        sequence_from_arrays([blank(8, 8), blank(8, 9)], fps=1.0)
