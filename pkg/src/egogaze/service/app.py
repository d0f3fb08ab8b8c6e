"""FastAPI service wrapping the streaming engine.

Each session owns one pipeline; frames are pushed in order and every push
returns that frame's gaze prediction, configuration energy, and boundary
(if one fired). Sessions are independent, so concurrent clients stream
concurrent videos. Stateless evaluation endpoints expose the metric kit.
"""

from __future__ import annotations

import base64
import binascii
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import (ConfigError, EgoGazeError, EmptyEvaluationError,
                      InvalidFrameError, PipelineError)
from ..evalkit import CameraModel, GazeRecord, aae, segmentation_accuracy
from ..features import Frame
from ..pipeline import FrameOutputs, GazePipeline
from .schemas import (AaeRequest, AaeResponse, BoundaryOut, FrameIn, FrameOut,
                      GazeOut, HealthOut, RunConfigModel, SegEvalRequest,
                      SegEvalResponse, SessionCreated, SessionSummary)

app = FastAPI(
    title="egogaze",
    version=__version__,
    description="Training-free gaze prediction and event segmentation for "
                "egocentric video streams",
)


class _Session:
    def __init__(self, pipeline: GazePipeline):
        self.pipeline = pipeline
        self.lock = threading.Lock()
        self.frames = 0
        self.boundaries: list[BoundaryOut] = []


_sessions: dict[str, _Session] = {}
_registry_lock = threading.Lock()


def _get_session(session_id: str) -> _Session:
    with _registry_lock:
        session = _sessions.get(session_id)
    if session is None:
        raise HTTPException(status_code=404,
                            detail=f"unknown session {session_id}")
    return session


def _decode_b64(payload: str, what: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError):
        raise HTTPException(status_code=400, detail=f"{what} is not valid base64")


def _frame_from_request(req: FrameIn) -> Frame:
    pixels = _decode_b64(req.pixels_b64, "pixels_b64")
    flow = None
    if req.flow_b64 is not None:
        raw = _decode_b64(req.flow_b64, "flow_b64")
        expected = req.width * req.height * 2 * 4
        if len(raw) != expected:
            raise HTTPException(
                status_code=400,
                detail=f"flow payload is {len(raw)} bytes, expected {expected}")
        flow = np.frombuffer(raw, dtype="<f4").reshape(req.height, req.width, 2)
    try:
        return Frame(width=req.width, height=req.height, pixels=pixels,
                     index=req.index, flow=flow)
    except InvalidFrameError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _frame_out(out: FrameOutputs) -> FrameOut:
    p = out.prediction
    boundary = None
    if out.boundary is not None:
        boundary = BoundaryOut(frame=out.boundary.frame_index,
                               energy=out.boundary.energy, z=out.boundary.z)
    return FrameOut(
        frame=p.frame_index,
        gaze=GazeOut(frame=p.frame_index, x=p.point[0], y=p.point[1],
                     cell_row=p.cell[0], cell_col=p.cell[1], mode=p.mode,
                     energy=p.energy),
        config_energy=out.config_energy,
        boundary=boundary,
    )


def _summary(session_id: str, session: _Session) -> SessionSummary:
    return SessionSummary(session_id=session_id, frames=session.frames,
                          boundaries=list(session.boundaries))


@app.get("/health", response_model=HealthOut)
def health() -> HealthOut:
    return HealthOut(status="ok", version=__version__)


@app.post("/sessions", response_model=SessionCreated, status_code=201)
def create_session(config: RunConfigModel) -> SessionCreated:
    try:
        pipeline = GazePipeline(config.to_run_config())
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    session_id = uuid.uuid4().hex
    with _registry_lock:
        _sessions[session_id] = _Session(pipeline)
    return SessionCreated(session_id=session_id)


@app.post("/sessions/{session_id}/frames", response_model=FrameOut)
def push_frame(session_id: str, req: FrameIn) -> FrameOut:
    session = _get_session(session_id)
    frame = _frame_from_request(req)
    with session.lock:
        try:
            out = session.pipeline.process_frame(frame)
        except PipelineError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except EgoGazeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session.frames += 1
        if out.boundary is not None:
            session.boundaries.append(
                BoundaryOut(frame=out.boundary.frame_index,
                            energy=out.boundary.energy, z=out.boundary.z))
    return _frame_out(out)


@app.get("/sessions/{session_id}", response_model=SessionSummary)
def session_status(session_id: str) -> SessionSummary:
    return _summary(session_id, _get_session(session_id))


@app.delete("/sessions/{session_id}", response_model=SessionSummary)
def close_session(session_id: str) -> SessionSummary:
    with _registry_lock:
        session = _sessions.pop(session_id, None)
    if session is None:
        raise HTTPException(status_code=404,
                            detail=f"unknown session {session_id}")
    return _summary(session_id, session)


@app.post("/eval/aae", response_model=AaeResponse)
def eval_aae(req: AaeRequest) -> AaeResponse:
    to_records = lambda rows: [GazeRecord(frame_index=r.frame, x=r.x, y=r.y,
                                          valid=r.valid) for r in rows]
    try:
        cam = CameraModel(width=req.width, height=req.height,
                          hfov_degrees=req.fov)
        value = aae(to_records(req.pred), to_records(req.truth), cam)
    except (ConfigError, EmptyEvaluationError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return AaeResponse(aae_degrees=value)


@app.post("/eval/segmentation", response_model=SegEvalResponse)
def eval_segmentation(req: SegEvalRequest) -> SegEvalResponse:
    try:
        value = segmentation_accuracy(req.boundaries, req.features, req.labels,
                                      req.k, req.seed, req.videos)
    except (ConfigError, EmptyEvaluationError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return SegEvalResponse(seg_accuracy=value)
