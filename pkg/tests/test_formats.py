import io
import json

import numpy as np
import pytest

from egogaze import formats
from egogaze.errors import DecodeError, SchemaError
from egogaze.predictor import GazePrediction
from egogaze.segmenter import EventBoundary


# ------------------------------------------------------------------ PPM / PGM

def test_ppm_round_trip():
    pixels = bytes(range(48)) * 2  # 4x8 frame
    data = formats.encode_ppm(4, 8, pixels)
    assert data.startswith(b"P6\n4 8\n255\n")
    assert formats.decode_ppm(data) == (4, 8, pixels)


def test_ppm_header_comments_and_whitespace():
    pixels = bytes(12)
    data = b"P6 # binary\n# a comment line\n 2\t2 \n255\n" + pixels
    assert formats.decode_ppm(data) == (2, 2, pixels)


def test_ppm_rejects_wrong_magic_and_depth():
    with pytest.raises(DecodeError):
        formats.decode_ppm(b"P5\n2 2\n255\n" + bytes(12))
    with pytest.raises(DecodeError):
        formats.decode_ppm(b"P6\n2 2\n65535\n" + bytes(24))


def test_ppm_rejects_truncated_payload():
    with pytest.raises(DecodeError):
        formats.decode_ppm(b"P6\n2 2\n255\n" + bytes(11))


def test_pgm_encoding():
    image = np.arange(6, dtype=np.uint8).reshape(2, 3)
    data = formats.encode_pgm(image)
    assert data == b"P5\n3 2\n255\n" + bytes(range(6))


# --------------------------------------------------------------------- flo32

def test_flo32_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    flow = rng.normal(0, 5, size=(6, 4, 2)).astype(np.float32)
    path = tmp_path / "frame.flo32"
    formats.write_flo32(path, flow)
    got = formats.read_flo32(path)
    assert got.shape == (6, 4, 2)
    np.testing.assert_array_equal(got, flow)


def test_flo32_rejects_bad_payload(tmp_path):
    path = tmp_path / "bad.flo32"
    path.write_bytes(b"\x04\x00\x00\x00\x06\x00\x00\x00" + bytes(10))
    with pytest.raises(DecodeError):
        formats.read_flo32(path)


# ------------------------------------------------------------------- RAWVIDEO

def test_rawvideo_header_and_frames():
    payload = bytes(2 * 2 * 3)
    stream = io.BytesIO(b"RAWVIDEO 2 2 29.97\n" + payload * 3)
    width, height, fps = formats.read_rawvideo_header(stream)
    assert (width, height, fps) == (2, 2, 29.97)
    frames = list(formats.iter_rawvideo_frames(stream, width, height))
    assert frames == [payload] * 3


def test_rawvideo_rejects_bad_header():
    with pytest.raises(DecodeError):
        formats.read_rawvideo_header(io.BytesIO(b"RAWVID 2 2 30\n"))
    with pytest.raises(DecodeError):
        formats.read_rawvideo_header(io.BytesIO(b"RAWVIDEO 2 2 30"))


def test_rawvideo_rejects_partial_frame():
    stream = io.BytesIO(b"RAWVIDEO 2 2 30\n" + bytes(13))
    formats.read_rawvideo_header(stream)
    with pytest.raises(DecodeError):
        list(formats.iter_rawvideo_frames(stream, 2, 2))


# --------------------------------------------------------------------- FEAT32

def test_feat32_round_trip(tmp_path):
    matrix = np.arange(12, dtype=np.float32).reshape(3, 4)
    path = tmp_path / "features.f32"
    formats.write_feat32(path, matrix)
    got = formats.read_features(path)
    assert got.dtype == np.float64
    np.testing.assert_array_equal(got, matrix)


def test_features_csv(tmp_path):
    path = tmp_path / "features.csv"
    path.write_text("frame,f0,f1\n0,1.5,2.5\n1,3.5,4.5\n")
    got = formats.read_features(path)
    np.testing.assert_array_equal(got, [[1.5, 2.5], [3.5, 4.5]])


def test_features_csv_schema_violations(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("frame,f0\n0,1.0\n2,2.0\n")
    with pytest.raises(SchemaError):
        formats.read_features(path)
    path.write_text("frame,f0\n0,1.0\n0,2.0\n")
    with pytest.raises(SchemaError) as err:
        formats.read_features(path)
    assert err.value.line == 3
    path.write_text("time,f0\n0,1.0\n")
    with pytest.raises(SchemaError):
        formats.read_features(path)


# ------------------------------------------------------------------ gaze CSVs

def prediction(i, x, y, mode="fixation", energy=0.0):
    return GazePrediction(frame_index=i, cell=(0, 0), point=(x, y), mode=mode,
                          energy=energy)


def test_gaze_csv_write_format(tmp_path):
    path = tmp_path / "gaze.csv"
    formats.write_gaze_csv(path, [prediction(0, 20, 15),
                                  prediction(1, 60, 15, "saccade", 0.1234567)])
    assert path.read_text() == (
        "frame,x,y,mode,energy\n"
        "0,20,15,fixation,0.000000\n"
        "1,60,15,saccade,0.123457\n")


def test_gaze_records_both_schemas(tmp_path):
    eval_path = tmp_path / "eval.csv"
    eval_path.write_text("frame,x,y,valid\n0,10.5,20.5,1\n1,11,21,0\n")
    records = formats.read_gaze_records(eval_path)
    assert records[0].x == 10.5 and records[0].valid
    assert not records[1].valid

    out_path = tmp_path / "out.csv"
    formats.write_gaze_csv(out_path, [prediction(0, 20, 15)])
    records = formats.read_gaze_records(out_path)
    assert records[0].valid and records[0].x == 20.0


def test_gaze_records_schema_violations(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("frame,x,y\n0,1,2\n")
    with pytest.raises(SchemaError) as err:
        formats.read_gaze_records(path)
    assert err.value.line == 1
    path.write_text("frame,x,y,valid\n0,1,2,yes\n")
    with pytest.raises(SchemaError) as err:
        formats.read_gaze_records(path)
    assert err.value.line == 2


# ---------------------------------------------------------------- events JSON

def test_events_json_format_and_round_trip(tmp_path):
    boundaries = [EventBoundary(frame_index=100, energy=1.25, z=3.456789123),
                  EventBoundary(frame_index=180, energy=2.0, z=None)]
    text = formats.format_events_json(boundaries)
    assert text == ('[\n'
                    '  {"frame": 100, "energy": 1.250000, "z": 3.456789},\n'
                    '  {"frame": 180, "energy": 2.000000, "z": null}\n'
                    ']\n')
    assert json.loads(text) == [
        {"frame": 100, "energy": 1.25, "z": 3.456789},
        {"frame": 180, "energy": 2.0, "z": None}]
    path = tmp_path / "events.json"
    path.write_text(text)
    got = formats.read_events_json(path)
    assert [b.frame_index for b in got] == [100, 180]
    assert got[1].z is None


def test_events_json_empty():
    assert formats.format_events_json([]) == "[]\n"


# ---------------------------------------------------------- labels & manifest

def test_labels_csv(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("frame,label\n0,2\n1,0\n2,1\n")
    np.testing.assert_array_equal(formats.read_labels_csv(path), [2, 0, 1])
    path.write_text("frame,label\n0,2\n2,0\n")
    with pytest.raises(SchemaError):
        formats.read_labels_csv(path)


def test_manifest(tmp_path):
    path = tmp_path / "videos.csv"
    path.write_text("video_id,start_frame,end_frame\nv1,0,99\nv2,100,199\n")
    assert formats.read_manifest(path) == [("v1", 0, 99), ("v2", 100, 199)]
    path.write_text("v1,0,99\n")  # header is optional
    assert formats.read_manifest(path) == [("v1", 0, 99)]
    path.write_text("v1,99,0\n")
    with pytest.raises(SchemaError):
        formats.read_manifest(path)
