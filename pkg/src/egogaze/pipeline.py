"""Streaming orchestration: ingest -> features -> surprise -> gaze -> gating.

One pipeline owns one video stream. All state (history ring, running
statistics, previous prediction, RNG) is private to the pipeline, so
independent streams can run on independent threads; within a stream the
produced outputs are a pure function of (config, seed, input bytes).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, replace

import numpy as np

from . import energy as energy_mod
from . import features as features_mod
from . import predictor as predictor_mod
from . import temporal as temporal_mod
from .energy import EnergyParams, configuration_energy
from .errors import ConfigError, PipelineError
from .features import Frame, FeatureScheme, feature_config
from .lattice import GridGeometry, build_geometry
from .predictor import (CenterBiasConfig, GazePrediction, PredictorParams,
                        center_bias, predict_gaze)
from .segmenter import EventBoundary, GatingParams, Segmenter
from .temporal import (DecayWeights, HistoryBuffer, SurpriseMap,
                       decay_weights, push_history, temporal_aggregate)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run, flat so config files and services mirror it 1:1."""

    grid: int = 16
    fps: float = 30.0
    k: int | None = None               # temporal window; None -> round(fps)
    feature_mode: str = features_mod.SUBBLOCK
    subblock: int = 4
    include_flow: bool = False
    max_displacement: float = 20.0
    w_s: float = 1.0
    alpha: float = 1.0
    motion_mode: str = energy_mod.PEARSON
    decay_a: float = 1.0
    decay_b: float = 0.95
    decay_form: str = temporal_mod.ONE_MINUS_B
    p_c: float = 0.95
    p_mode: str = predictor_mod.PROPORTIONAL
    p_fixed: float = 0.5
    center_sigma: float | None = None  # None -> grid/6
    seed: int = 42
    lam: float = 2.5
    min_event_len: int = 15
    warmup: int | None = None          # None -> window k

    @property
    def window(self) -> int:
        k = self.k if self.k is not None else round(self.fps)
        if k < 1:
            raise ConfigError(f"temporal window must be >= 1, got {k}")
        return k

    def scheme(self) -> FeatureScheme:
        return FeatureScheme(mode=self.feature_mode, subblock=self.subblock,
                             include_flow=self.include_flow,
                             max_displacement=self.max_displacement)

    def energy_params(self) -> EnergyParams:
        return EnergyParams(w_s=self.w_s, alpha=self.alpha,
                            motion_mode=self.motion_mode)

    def decay(self) -> DecayWeights:
        return decay_weights(self.window, self.decay_a, self.decay_b,
                             self.decay_form)

    def predictor_params(self) -> PredictorParams:
        return PredictorParams(p_c=self.p_c, p_mode=self.p_mode,
                               p_fixed=self.p_fixed,
                               center_sigma=self.center_sigma, seed=self.seed)

    def gating_params(self) -> GatingParams:
        warmup = self.warmup if self.warmup is not None else self.window
        return GatingParams(lam=self.lam, min_event_len=self.min_event_len,
                            warmup=warmup)


# config-file key -> (field name, parser); keys match the CLI flag spelling
_NONE_WORDS = ("", "none")


def _opt(parser):
    return lambda s: None if s.strip().lower() in _NONE_WORDS else parser(s)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


CONFIG_KEYS: dict[str, tuple[str, object]] = {
    "grid": ("grid", int),
    "fps": ("fps", float),
    "k": ("k", _opt(int)),
    "feature_mode": ("feature_mode", str.strip),
    "subblock": ("subblock", int),
    "include_flow": ("include_flow", _bool),
    "max_displacement": ("max_displacement", float),
    "w_s": ("w_s", float),
    "alpha": ("alpha", float),
    "motion_mode": ("motion_mode", str.strip),
    "decay_a": ("decay_a", float),
    "decay_b": ("decay_b", float),
    "decay_form": ("decay_form", str.strip),
    "p_c": ("p_c", float),
    "p_mode": ("p_mode", str.strip),
    "p_fixed": ("p_fixed", float),
    "center_sigma": ("center_sigma", _opt(float)),
    "seed": ("seed", int),
    "lambda": ("lam", float),
    "min_event_len": ("min_event_len", int),
    "warmup": ("warmup", _opt(int)),
}


def config_from_mapping(mapping: dict[str, str],
                        base: RunConfig | None = None) -> RunConfig:
    """Apply flat `key = value` string pairs on top of a base config."""
    cfg = base if base is not None else RunConfig()
    updates = {}
    for key, raw in mapping.items():
        entry = CONFIG_KEYS.get(key)
        if entry is None:
            raise ConfigError(f"unknown config key {key!r}")
        name, parse = entry
        try:
            updates[name] = parse(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    return replace(cfg, **updates)


def load_config_file(path, base: RunConfig | None = None) -> RunConfig:
    """Parse a flat `key = value` config file (# comments, blank lines ok)."""
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping, base)


@dataclass(frozen=True)
class FrameOutputs:
    """Everything the pipeline emits for one frame, in frame order."""

    prediction: GazePrediction
    config_energy: float
    boundary: EventBoundary | None
    surprise: SurpriseMap


@dataclass(frozen=True)
class RunSummary:
    frames: int
    boundaries: int
    elapsed_s: float
    fps: float


class GazePipeline:
    """Sequential per-frame engine for one video stream."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.k = config.window
        self.scheme = config.scheme()
        self.energy_params = config.energy_params()
        self.weights = config.decay()
        self.predictor_params = config.predictor_params()
        self.segmenter = Segmenter(config.gating_params())
        self.history = HistoryBuffer(self.k)
        self.rng = random.Random(self.predictor_params.seed)
        self.geometry: GridGeometry | None = None
        self._cb: CenterBiasConfig | None = None
        self._prev: GazePrediction | None = None
        self._next_index = 0

    def _zero_map(self, frame_index: int) -> SurpriseMap:
        n = self.geometry.n
        return SurpriseMap(geometry=self.geometry,
                           values=np.zeros((n, n), dtype=np.float64),
                           frame_index=frame_index)

    def process_frame(self, frame: Frame) -> FrameOutputs:
        if frame.index != self._next_index:
            raise PipelineError(
                f"frame {frame.index}: expected frame {self._next_index} "
                f"(streams are 0-based and consecutive)")
        if self.geometry is None:
            self.geometry = build_geometry(frame.width, frame.height,
                                           self.config.grid)
            self._cb = center_bias(self.geometry,
                                   self.predictor_params.center_sigma)

        config = feature_config(frame, self.geometry, self.scheme)
        if len(self.history) == 0:
            surprise = self._zero_map(frame.index)
        else:
            surprise = temporal_aggregate(config, self.history, self.weights,
                                          self.energy_params)
        prediction = predict_gaze(surprise, self._prev, self.predictor_params,
                                  self._cb, self.energy_params, self.rng)
        total = configuration_energy(surprise)
        boundary = self.segmenter.observe(total, frame.index)

        push_history(self.history, config)
        self._prev = prediction
        self._next_index += 1
        return FrameOutputs(prediction=prediction, config_energy=total,
                            boundary=boundary, surprise=surprise)


def process_stream(config: RunConfig, frames, sink=None) -> RunSummary:
    """Drive a pipeline over a frame iterator, routing outputs to a sink.

    The sink is called once per frame with the FrameOutputs; exceptions
    propagate and abort the stream.
    """
    pipeline = GazePipeline(config)
    count = 0
    boundaries = 0
    start = time.perf_counter()
    for frame in frames:
        out = pipeline.process_frame(frame)
        count += 1
        if out.boundary is not None:
            boundaries += 1
        if sink is not None:
            sink(out)
    elapsed = time.perf_counter() - start
    fps = count / elapsed if elapsed > 0 else 0.0
    return RunSummary(frames=count, boundaries=boundaries,
                      elapsed_s=elapsed, fps=fps)
