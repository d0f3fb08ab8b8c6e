"""Gaze prediction: center-bias acceptor, stochastic saccade/fixation scan.

Per frame, one uniform draw picks between the temporal surprise map and a
fixed center-bias bump. The chosen map is then scanned in row-major order
starting from the previous prediction; candidates whose distance-scaled
energy strictly exceeds the incumbent's are accepted with a probability
proportional to the energy gap (or a fixed probability). The strict-greater
test plus distance penalty is what lets the model fixate instead of
teleporting to every transient.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams
from .errors import ConfigError, PipelineError
from .lattice import GridGeometry
from .temporal import SurpriseMap

PROPORTIONAL = "proportional"
FIXED = "fixed"
P_MODES = (PROPORTIONAL, FIXED)

FIXATION = "fixation"
SACCADE = "saccade"
CENTER_BIAS = "center-bias"


@dataclass(frozen=True)
class PredictorParams:
    """Acceptance probabilities and center-bias shape for the gaze scan."""

    p_c: float = 0.95
    p_mode: str = PROPORTIONAL
    p_fixed: float = 0.5
    center_sigma: float | None = None  # cells; None -> n/6 when the bump is built
    seed: int = 42

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_c <= 1.0:
            raise ConfigError(f"p_c must be in [0, 1], got {self.p_c}")
        if self.p_mode not in P_MODES:
            raise ConfigError(f"unknown p mode {self.p_mode!r}")
        if not 0.0 <= self.p_fixed <= 1.0:
            raise ConfigError(f"p_fixed must be in [0, 1], got {self.p_fixed}")
        if self.center_sigma is not None and not self.center_sigma > 0:
            raise ConfigError(
                f"center_sigma must be > 0, got {self.center_sigma}")


@dataclass(eq=False)
class CenterBiasConfig:
    """Gaussian bump over the grid, peak 1 at the frame center."""

    geometry: GridGeometry
    values: np.ndarray  # (n, n)
    sigma: float


def center_bias(geometry: GridGeometry,
                sigma: float | None = None) -> CenterBiasConfig:
    """Build the center-bias configuration for a grid.

    The bump is centered at ((n-1)/2, (n-1)/2); for even n the four central
    cells tie at the peak value and (n//2, n//2) is the designated argmax.
    """
    n = geometry.n
    s = float(sigma) if sigma is not None else n / 6.0
    if not s > 0:
        raise ConfigError(f"center-bias sigma must be > 0, got {s}")
    c = (n - 1) / 2.0
    idx = np.arange(n, dtype=np.float64)
    d2 = (idx - c) ** 2
    values = np.exp(-(d2[:, None] + d2[None, :]) / (2.0 * s * s))
    return CenterBiasConfig(geometry=geometry, values=values, sigma=s)


@dataclass(frozen=True)
class GazePrediction:
    """Predicted gaze for one frame: grid cell, pixel point, and mode."""

    frame_index: int
    cell: tuple[int, int]
    point: tuple[int, int]
    mode: str
    energy: float


def distance_scale(candidate: tuple[int, int], previous: tuple[int, int],
                   geometry: GridGeometry) -> float:
    """Penalty divisor 1 + ||delta|| / (n * sqrt(2)), in [1, 2)."""
    dr = candidate[0] - previous[0]
    dc = candidate[1] - previous[1]
    return 1.0 + math.hypot(dr, dc) / (geometry.n * math.sqrt(2.0))


def _distance_grid(geometry: GridGeometry, previous: tuple[int, int]) -> np.ndarray:
    n = geometry.n
    rows = np.arange(n, dtype=np.float64) - previous[0]
    cols = np.arange(n, dtype=np.float64) - previous[1]
    d = np.hypot(rows[:, None], cols[None, :])
    return 1.0 + d / (n * math.sqrt(2.0))


def _cell_point(geometry: GridGeometry, row: int, col: int) -> tuple[int, int]:
    # half-up rounding keeps the point inside the cell for odd sizes
    cx, cy = geometry.cell_center(row, col)
    return int(math.floor(cx + 0.5)), int(math.floor(cy + 0.5))


def predict_gaze(surprise: SurpriseMap, prev: GazePrediction | None,
                 params: PredictorParams, cb: CenterBiasConfig,
                 energy_params: EnergyParams,
                 rng: random.Random) -> GazePrediction:
    """Run one frame of the gaze acceptor scan.

    Draw budget is exactly 1 (map-vs-center-bias acceptor) plus one draw per
    candidate whose effective energy strictly improves on the incumbent at
    the moment it is scanned.
    """
    geometry = surprise.geometry
    if cb.geometry != geometry:
        raise PipelineError("center-bias geometry does not match the stream")

    center_mode = not (rng.random() < params.p_c)
    values = cb.values if center_mode else surprise.values

    prev_cell = prev.cell if prev is not None else geometry.center_cell
    n = geometry.n

    # effective energies on a scratch copy; the surprise map is never mutated
    eff = (values / _distance_grid(geometry, prev_cell)).ravel().tolist()

    best_i = prev_cell[0] * n + prev_cell[1]
    best = eff[best_i]
    if params.p_mode == PROPORTIONAL:
        gap_scale = 2.0 * energy_params.max_bond_energy
        for i, e in enumerate(eff):
            if e > best:
                p = min(1.0, (e - best) / gap_scale)
                if rng.random() < p:
                    best_i, best = i, e
    else:
        p = params.p_fixed
        for i, e in enumerate(eff):
            if e > best:
                if rng.random() < p:
                    best_i, best = i, e

    cell = (best_i // n, best_i % n)
    if center_mode:
        mode = CENTER_BIAS
    else:
        mode = FIXATION if cell == prev_cell else SACCADE
    return GazePrediction(
        frame_index=surprise.frame_index,
        cell=cell,
        point=_cell_point(geometry, *cell),
        mode=mode,
        energy=best,
    )
