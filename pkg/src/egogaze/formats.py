"""Bit-exact file formats.

Covers every surface the CLI and tests exchange: binary PPM frames, PGM
heatmaps, .flo32 flow sidecars, RAWVIDEO byte streams, FEAT32 feature
matrices, gaze/energy CSVs, event-boundary JSON, label CSVs, and
per-video manifests. Writers emit exactly what readers accept; reruns
with identical inputs overwrite outputs with identical bytes.
"""

from __future__ import annotations

import json
import re
import struct
from pathlib import Path

import numpy as np

from .errors import DecodeError, SchemaError
from .evalkit import GazeRecord
from .predictor import GazePrediction
from .segmenter import EventBoundary

# ---------------------------------------------------------------- PPM / PGM

_WHITESPACE = b" \t\r\n\v\f"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data):
        if data[pos:pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise DecodeError("PPM header: unterminated comment")
            pos = nl + 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and data[pos] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise DecodeError("PPM header: truncated")
    return data[start:pos], pos


def decode_ppm(data: bytes) -> tuple[int, int, bytes]:
    """Decode a binary (P6) 8-bit PPM into (width, height, RGB24 bytes)."""
    magic, pos = _next_token(data, 0)
    if magic != b"P6":
        raise DecodeError(f"not a binary PPM (magic {magic!r})")
    dims = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        if not token.isdigit():
            raise DecodeError(f"PPM header: bad integer {token!r}")
        dims.append(int(token))
    width, height, maxval = dims
    if maxval != 255:
        raise DecodeError(f"only 8-bit PPM supported (maxval {maxval})")
    if width < 1 or height < 1:
        raise DecodeError(f"bad PPM dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    need = width * height * 3
    payload = data[pos:pos + need]
    if len(payload) != need:
        raise DecodeError(
            f"PPM payload truncated: {len(payload)} of {need} bytes")
    return width, height, payload


def read_ppm(path) -> tuple[int, int, bytes]:
    return decode_ppm(Path(path).read_bytes())


def encode_ppm(width: int, height: int, pixels: bytes) -> bytes:
    if len(pixels) != width * height * 3:
        raise DecodeError("pixel buffer does not match dimensions")
    return b"P6\n%d %d\n255\n" % (width, height) + pixels


def write_ppm(path, width: int, height: int, pixels: bytes) -> None:
    Path(path).write_bytes(encode_ppm(width, height, pixels))


def encode_pgm(image: np.ndarray) -> bytes:
    """Encode a 2-D uint8 array as binary (P5) PGM."""
    if image.ndim != 2 or image.dtype != np.uint8:
        raise DecodeError("PGM encoder expects a 2-D uint8 array")
    h, w = image.shape
    return b"P5\n%d %d\n255\n" % (w, h) + image.tobytes()


def write_pgm(path, image: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm(image))


# ------------------------------------------------------------- flow sidecars

def read_flo32(path) -> np.ndarray:
    """Read a .flo32 sidecar: u32 width, u32 height, then (dx, dy) float32 LE."""
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise DecodeError(f"{path}: flow header truncated")
    width, height = struct.unpack("<II", data[:8])
    need = width * height * 2 * 4
    if len(data) - 8 != need:
        raise DecodeError(
            f"{path}: flow payload is {len(data) - 8} bytes, expected {need}")
    flow = np.frombuffer(data, dtype="<f4", offset=8)
    return flow.reshape(height, width, 2)


def write_flo32(path, flow: np.ndarray) -> None:
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise DecodeError("flow array must be (height, width, 2)")
    height, width = flow.shape[:2]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", width, height))
        fh.write(np.ascontiguousarray(flow, dtype="<f4").tobytes())


# ------------------------------------------------------------ RAWVIDEO pipe

def read_rawvideo_header(stream) -> tuple[int, int, float]:
    """Parse the `RAWVIDEO <width> <height> <fps>` line off a byte stream."""
    line = bytearray()
    while len(line) < 256:
        ch = stream.read(1)
        if not ch:
            raise DecodeError("RAWVIDEO header: stream ended before newline")
        if ch == b"\n":
            break
        line += ch
    else:
        raise DecodeError("RAWVIDEO header: line too long")
    m = re.fullmatch(rb"RAWVIDEO (\d+) (\d+) (\d+(?:\.\d+)?)",
                     bytes(line).rstrip(b"\r"))
    if m is None:
        raise DecodeError(f"bad RAWVIDEO header: {bytes(line)!r}")
    return int(m.group(1)), int(m.group(2)), float(m.group(3))


def iter_rawvideo_frames(stream, width: int, height: int):
    """Yield RGB24 frame payloads until EOF; a partial trailing frame is an error."""
    need = width * height * 3
    index = 0
    while True:
        chunk = stream.read(need)
        if not chunk:
            return
        while len(chunk) < need:
            more = stream.read(need - len(chunk))
            if not more:
                raise DecodeError(
                    f"frame {index}: truncated ({len(chunk)} of {need} bytes)")
            chunk += more
        yield chunk
        index += 1


# ------------------------------------------------------------------- FEAT32

FEAT32_MAGIC = b"FEAT32"


def write_feat32(path, matrix: np.ndarray) -> None:
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise DecodeError("feature matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(FEAT32_MAGIC)
        fh.write(struct.pack("<II", m.shape[0], m.shape[1]))
        fh.write(m.tobytes())


def _read_feat32(data: bytes, path) -> np.ndarray:
    if len(data) < len(FEAT32_MAGIC) + 8:
        raise DecodeError(f"{path}: FEAT32 header truncated")
    off = len(FEAT32_MAGIC)
    rows, dims = struct.unpack("<II", data[off:off + 8])
    need = rows * dims * 4
    payload = data[off + 8:]
    if len(payload) != need:
        raise DecodeError(
            f"{path}: FEAT32 payload is {len(payload)} bytes, expected {need}")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, dims).astype(np.float64)


def _read_features_csv(text: str, path) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty feature file", line=1)
    header = lines[0].split(",")
    if header[0] != "frame" or any(not h.startswith("f") for h in header[1:]):
        raise SchemaError(f"{path}: expected header frame,f0,f1,...", line=1)
    dims = len(header) - 1
    if dims < 1:
        raise SchemaError(f"{path}: no feature columns", line=1)
    rows: dict[int, list[float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != dims + 1:
            raise SchemaError(f"{path}: expected {dims + 1} columns", line=lineno)
        try:
            frame = int(parts[0])
            values = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=lineno) from exc
        if frame in rows:
            raise SchemaError(f"{path}: duplicate frame {frame}", line=lineno)
        rows[frame] = values
    if not rows:
        raise SchemaError(f"{path}: no feature rows", line=2)
    if sorted(rows) != list(range(len(rows))):
        raise SchemaError(f"{path}: frames must cover 0..{len(rows) - 1}", line=2)
    return np.array([rows[i] for i in range(len(rows))], dtype=np.float64)


def read_features(path) -> np.ndarray:
    """Read a per-frame feature matrix, FEAT32 binary or CSV."""
    data = Path(path).read_bytes()
    if data.startswith(FEAT32_MAGIC):
        return _read_feat32(data, path)
    return _read_features_csv(data.decode("utf-8"), path)


# ---------------------------------------------------------------- gaze CSVs

GAZE_OUT_HEADER = "frame,x,y,mode,energy"
GAZE_EVAL_HEADER = "frame,x,y,valid"


def format_gaze_row(p: GazePrediction) -> str:
    return f"{p.frame_index},{p.point[0]},{p.point[1]},{p.mode},{p.energy:.6f}"


def write_gaze_csv(path, predictions) -> None:
    lines = [GAZE_OUT_HEADER]
    lines.extend(format_gaze_row(p) for p in predictions)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_gaze_records(path) -> list[GazeRecord]:
    """Read gaze records for evaluation.

    Accepts the evaluation schema (frame,x,y,valid) and, for convenience,
    the predictor output schema (frame,x,y,mode,energy) with every row
    treated as valid.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty gaze file", line=1)
    header = lines[0].strip()
    if header == GAZE_EVAL_HEADER:
        has_valid = True
    elif header == GAZE_OUT_HEADER:
        has_valid = False
    else:
        raise SchemaError(
            f"{path}: expected header {GAZE_EVAL_HEADER!r} or "
            f"{GAZE_OUT_HEADER!r}", line=1)
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != (4 if has_valid else 5):
            raise SchemaError(f"{path}: wrong column count", line=lineno)
        try:
            frame = int(parts[0])
            x = float(parts[1])
            y = float(parts[2])
            if has_valid:
                flag = parts[3].strip()
                if flag not in ("0", "1"):
                    raise ValueError(f"valid must be 0 or 1, got {flag!r}")
                valid = flag == "1"
            else:
                float(parts[4])  # energy column must at least parse
                valid = True
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=lineno) from exc
        records.append(GazeRecord(frame_index=frame, x=x, y=y, valid=valid))
    if not records:
        raise SchemaError(f"{path}: no gaze rows", line=2)
    return records


# ------------------------------------------------------------- energies CSV

ENERGIES_HEADER = "frame,energy"


def write_energies_csv(path, rows) -> None:
    lines = [ENERGIES_HEADER]
    lines.extend(f"{frame},{energy:.6f}" for frame, energy in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------- events JSON

def format_events_json(boundaries) -> str:
    """Serialize boundaries as a JSON array with 6-decimal energies/z."""
    items = []
    for b in boundaries:
        z = "null" if b.z is None else f"{b.z:.6f}"
        items.append(
            f'{{"frame": {b.frame_index}, "energy": {b.energy:.6f}, "z": {z}}}')
    if not items:
        return "[]\n"
    return "[\n  " + ",\n  ".join(items) + "\n]\n"


def write_events_json(path, boundaries) -> None:
    Path(path).write_text(format_events_json(boundaries), encoding="utf-8")


def read_events_json(path) -> list[EventBoundary]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}", line=exc.lineno) from exc
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: expected a JSON array", line=1)
    out = []
    for item in raw:
        try:
            out.append(EventBoundary(frame_index=int(item["frame"]),
                                     energy=float(item["energy"]),
                                     z=None if item["z"] is None
                                     else float(item["z"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: bad boundary object {item!r} ({exc})")
    return out


# ------------------------------------------------------- labels and manifests

def read_labels_csv(path) -> np.ndarray:
    """Read per-frame integer labels (header frame,label, frames 0..T-1)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "frame,label":
        raise SchemaError(f"{path}: expected header frame,label", line=1)
    rows: dict[int, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"{path}: expected 2 columns", line=lineno)
        try:
            frame, label = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=lineno) from exc
        if frame in rows:
            raise SchemaError(f"{path}: duplicate frame {frame}", line=lineno)
        rows[frame] = label
    if not rows:
        raise SchemaError(f"{path}: no label rows", line=2)
    if sorted(rows) != list(range(len(rows))):
        raise SchemaError(f"{path}: frames must cover 0..{len(rows) - 1}", line=2)
    return np.array([rows[i] for i in range(len(rows))], dtype=np.int64)


MANIFEST_HEADER = "video_id,start_frame,end_frame"


def read_manifest(path) -> list[tuple[str, int, int]]:
    """Read `video_id,start_frame,end_frame` ranges (end inclusive)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or (lineno == 1 and stripped == MANIFEST_HEADER):
            continue
        parts = stripped.split(",")
        if len(parts) != 3:
            raise SchemaError(f"{path}: expected 3 columns", line=lineno)
        try:
            start, end = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=lineno) from exc
        if end < start:
            raise SchemaError(f"{path}: end_frame before start_frame",
                              line=lineno)
        out.append((parts[0], start, end))
    if not out:
        raise SchemaError(f"{path}: no video ranges", line=1)
    return out
