"""Event segmentation by error-gating the global configuration energy.

Energies since the last boundary feed a Welford accumulator; a frame whose
energy exceeds mean + lambda * std opens a new event and resets the
statistics. A refractory window suppresses degenerate one-frame events and
a warmup delay covers the history fill-in period, whose energies are not
comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, PipelineError


@dataclass(frozen=True)
class GatingParams:
    """Threshold (in running std-devs), refractory length, warmup delay."""

    lam: float = 2.5
    min_event_len: int = 15
    warmup: int | None = None  # None -> the temporal window k (pipeline resolves)

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ConfigError(f"gating threshold must be > 0, got {self.lam}")
        if self.min_event_len < 1:
            raise ConfigError(
                f"min_event_len must be >= 1, got {self.min_event_len}")
        if self.warmup is not None and self.warmup < 0:
            raise ConfigError(f"warmup must be >= 0, got {self.warmup}")


class RunningStats:
    """Welford accumulator over the energies of the current event."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class EventBoundary:
    """Frame at which gated configuration energy signalled a new event.

    z is None when the running std was exactly 0 at the trigger (the
    z-score is then unbounded); it serializes as null.
    """

    frame_index: int
    energy: float
    z: float | None


class Segmenter:
    """Sequential gate over a stream of configuration energies."""

    def __init__(self, params: GatingParams):
        self.params = params
        self.stats = RunningStats()
        self._last_frame: int | None = None
        self._last_boundary: int | None = None

    @property
    def last_boundary(self) -> int | None:
        return self._last_boundary

    def observe(self, energy: float, frame_index: int) -> EventBoundary | None:
        """Fold one frame's energy; emit a boundary when the gate fires.

        The triggering energy is not folded into the fresh statistics, so
        the next event's baseline starts from the frames after the boundary.
        """
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise PipelineError(
                f"energies must arrive in frame order: got {frame_index} "
                f"after {self._last_frame}")
        self._last_frame = frame_index

        warm = self.params.warmup or 0
        gap_ok = (self._last_boundary is None
                  or frame_index - self._last_boundary >= self.params.min_event_len)
        if frame_index >= warm and gap_ok and self.stats.count >= 2:
            mean = self.stats.mean
            std = self.stats.std
            if energy > mean + self.params.lam * std:
                z = (energy - mean) / std if std > 0.0 else None
                self.stats.reset()
                self._last_boundary = frame_index
                return EventBoundary(frame_index=frame_index, energy=energy, z=z)
        self.stats.update(energy)
        return None
