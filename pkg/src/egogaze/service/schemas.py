"""Pydantic request/response models for the HTTP service.

RunConfigModel mirrors the flat config-file keys one to one, including the
`lambda` spelling of the gating threshold.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from ..pipeline import RunConfig


class RunConfigModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    grid: int = 16
    fps: float = 30.0
    k: int | None = None
    feature_mode: str = "subblock"
    subblock: int = 4
    include_flow: bool = False
    max_displacement: float = 20.0
    w_s: float = 1.0
    alpha: float = 1.0
    motion_mode: str = "pearson-dissimilarity"
    decay_a: float = 1.0
    decay_b: float = 0.95
    decay_form: str = "one-minus-b"
    p_c: float = 0.95
    p_mode: str = "proportional"
    p_fixed: float = 0.5
    center_sigma: float | None = None
    seed: int = 42
    lam: float = Field(2.5, alias="lambda")
    min_event_len: int = 15
    warmup: int | None = None

    def to_run_config(self) -> RunConfig:
        return RunConfig(**self.model_dump(by_alias=False))


class FrameIn(BaseModel):
    """One RGB24 frame; pixel (and optional flow) payloads are base64."""

    index: int
    width: int
    height: int
    pixels_b64: str
    flow_b64: str | None = None  # raw (height, width, 2) float32 LE


class GazeOut(BaseModel):
    frame: int
    x: int
    y: int
    cell_row: int
    cell_col: int
    mode: str
    energy: float


class BoundaryOut(BaseModel):
    frame: int
    energy: float
    z: float | None


class FrameOut(BaseModel):
    frame: int
    gaze: GazeOut
    config_energy: float
    boundary: BoundaryOut | None


class SessionCreated(BaseModel):
    session_id: str


class SessionSummary(BaseModel):
    session_id: str
    frames: int
    boundaries: list[BoundaryOut]


class GazeRecordIn(BaseModel):
    frame: int
    x: float
    y: float
    valid: bool = True


class AaeRequest(BaseModel):
    pred: list[GazeRecordIn]
    truth: list[GazeRecordIn]
    width: int
    height: int
    fov: float = 60.0


class AaeResponse(BaseModel):
    aae_degrees: float


class SegEvalRequest(BaseModel):
    boundaries: list[int]
    features: list[list[float]]
    labels: list[int]
    k: int
    seed: int = 42
    videos: list[tuple[int, int]] | None = None


class SegEvalResponse(BaseModel):
    seg_accuracy: float


class HealthOut(BaseModel):
    status: str
    version: str
