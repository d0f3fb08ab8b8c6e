"""Temporal aggregation: history buffer, decay weights, per-cell surprise.

The last k feature configurations are compared cell-by-cell against the
current one; the resulting temporal bond energies are blended with
exponentially decaying weights into the per-frame surprise map.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams, pairwise_bond_energies
from .errors import ConfigError, PipelineError
from .lattice import Configuration, GridGeometry

ONE_MINUS_B = "one-minus-b"
RETENTION_B = "b"
DECAY_FORMS = (ONE_MINUS_B, RETENTION_B)


@dataclass(frozen=True, eq=False)
class DecayWeights:
    """Normalized, non-increasing weights over lags 1..k."""

    k: int
    a: float
    b: float
    form: str
    weights: np.ndarray

    def truncated(self, m: int) -> np.ndarray:
        """Weights renormalized over the first m lags (warmup shorter than k).

        Recomputed from the raw formula so a partial history is bit-identical
        to a fresh k=m run.
        """
        if m >= self.k:
            return self.weights
        return decay_weights(m, self.a, self.b, self.form).weights


def decay_weights(k: int, a: float = 1.0, b: float = 0.95,
                  form: str = ONE_MINUS_B) -> DecayWeights:
    """Exponential decay weights: raw w_i = a * base^(i-1), normalized.

    The base is (1 - b) by default; the retention form uses b itself so
    slowly decaying windows can be expressed without inverting b.
    """
    if k < 1:
        raise ConfigError(f"window length must be >= 1, got {k}")
    if not a > 0:
        raise ConfigError(f"decay initial value must be > 0, got {a}")
    if not 0 < b < 1:
        raise ConfigError(f"decay factor must be in (0, 1), got {b}")
    if form not in DECAY_FORMS:
        raise ConfigError(f"unknown decay form {form!r}")
    base = (1.0 - b) if form == ONE_MINUS_B else b
    raw = a * base ** np.arange(k, dtype=np.float64)
    return DecayWeights(k=k, a=a, b=b, form=form, weights=raw / raw.sum())


class HistoryBuffer:
    """Ring of the most recent k feature configurations.

    Single-owner: only the sequential pipeline thread mutates it.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ConfigError(f"history capacity must be >= 1, got {k}")
        self.k = k
        self._entries: deque[Configuration] = deque(maxlen=k)

    def __len__(self) -> int:
        return len(self._entries)

    def newest_first(self):
        """Configurations from lag 1 (most recent) to lag len(self)."""
        return reversed(self._entries)

    @property
    def last_index(self) -> int | None:
        return self._entries[-1].frame_index if self._entries else None

    def push(self, config: Configuration) -> None:
        last = self.last_index
        if last is not None and config.frame_index != last + 1:
            raise PipelineError(
                f"out-of-order history push: frame {config.frame_index} "
                f"after {last}")
        self._entries.append(config)


def push_history(buffer: HistoryBuffer, config: Configuration) -> HistoryBuffer:
    """Append a configuration, evicting the oldest when full."""
    buffer.push(config)
    return buffer


@dataclass(eq=False)
class SurpriseMap:
    """Per-cell aggregated temporal surprise at one frame."""

    geometry: GridGeometry
    values: np.ndarray  # (n, n) float64, within [0, w_s * tanh(alpha)]
    frame_index: int


def temporal_aggregate(current: Configuration, history: HistoryBuffer,
                       weights: DecayWeights,
                       params: EnergyParams) -> SurpriseMap:
    """Blend temporal bond energies over the history window.

    Cell (r, c) gets sum_i w_i * bond_energy(features(r, c, t),
    features(r, c, t - i)) for i = 1..min(k, len(history)); with a partial
    history the weights are renormalized over the available lags.
    """
    if len(history) == 0:
        raise PipelineError("temporal aggregation needs a non-empty history")
    m = min(weights.k, len(history))
    w = weights.truncated(m)
    acc = np.zeros(current.features.shape[0], dtype=np.float64)
    for i, past in enumerate(history.newest_first()):
        if i >= m:
            break
        if past.geometry != current.geometry:
            raise PipelineError(
                f"geometry changed between frames {past.frame_index} and "
                f"{current.frame_index}")
        acc += w[i] * pairwise_bond_energies(current, past, params)
    n = current.geometry.n
    return SurpriseMap(geometry=current.geometry, values=acc.reshape(n, n),
                       frame_index=current.frame_index)


def heatmap_image(surprise: SurpriseMap, params: EnergyParams) -> np.ndarray:
    """8-bit attention image of a surprise map at full frame resolution.

    Values are scaled by the bond-energy bound and upscaled
    nearest-neighbor; remainder pixels follow the last row/column cells.
    """
    geo = surprise.geometry
    scale = 255.0 / params.max_bond_energy
    v8 = np.clip(np.rint(surprise.values * scale), 0, 255).astype(np.uint8)
    rows = np.minimum(np.arange(geo.frame_height) // geo.cell_height, geo.n - 1)
    cols = np.minimum(np.arange(geo.frame_width) // geo.cell_width, geo.n - 1)
    return v8[np.ix_(rows, cols)]
