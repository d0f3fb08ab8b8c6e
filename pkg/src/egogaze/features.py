"""Per-frame feature extraction: decoded frame -> feature configuration.

Each grid cell is summarized either by its mean RGB (3 dims) or by the
mean RGB of an s x s sub-block split of the cell (3*s*s dims, default
s=4). A per-cell mean optical-flow pair can be appended from an ingested
flow map. All channels land in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, InvalidFrameError, MissingFlowError
from .lattice import Configuration, GridGeometry

MEAN_RGB = "mean-rgb"
SUBBLOCK = "subblock"
FEATURE_MODES = (MEAN_RGB, SUBBLOCK)


@dataclass(frozen=True)
class FeatureScheme:
    """How a cell's pixels are reduced to a feature vector."""

    mode: str = SUBBLOCK
    subblock: int = 4
    include_flow: bool = False
    max_displacement: float = 20.0

    def __post_init__(self) -> None:
        if self.mode not in FEATURE_MODES:
            raise ConfigError(f"unknown feature mode {self.mode!r}")
        if self.subblock < 1:
            raise ConfigError(f"subblock split must be >= 1, got {self.subblock}")
        if not self.max_displacement > 0:
            raise ConfigError(
                f"max_displacement must be > 0, got {self.max_displacement}")

    @property
    def splits(self) -> int:
        return self.subblock if self.mode == SUBBLOCK else 1

    @property
    def dim(self) -> int:
        return 3 * self.splits ** 2 + (2 if self.include_flow else 0)


@dataclass
class Frame:
    """One decoded RGB24 frame, optionally with a per-pixel flow map."""

    width: int
    height: int
    pixels: bytes
    index: int
    flow: np.ndarray | None = None  # (height, width, 2) displacements in px

    def __post_init__(self) -> None:
        expected = self.width * self.height * 3
        if len(self.pixels) != expected:
            raise InvalidFrameError(
                f"frame {self.index}: {len(self.pixels)} pixel bytes, "
                f"expected {expected}")
        if self.flow is not None and self.flow.shape != (self.height, self.width, 2):
            raise InvalidFrameError(
                f"frame {self.index}: flow shape {self.flow.shape} does not "
                f"match {self.height}x{self.width}")


def _axis_splits(total: int, n: int, cell: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Segment starts and lengths for n cells each split into s bands.

    Interior bands are floored; the last band of each cell absorbs that
    cell's remainder, mirroring the grid's own remainder rule.
    """
    starts = np.empty(n * s, dtype=np.intp)
    lengths = np.empty(n * s, dtype=np.intp)
    for c in range(n):
        x0 = c * cell
        width = cell if c < n - 1 else total - x0
        sub = width // s
        for j in range(s):
            starts[c * s + j] = x0 + j * sub
            lengths[c * s + j] = sub if j < s - 1 else width - (s - 1) * sub
    return starts, lengths


@lru_cache(maxsize=64)
def _split_plan(geometry: GridGeometry, s: int):
    row_starts, row_lens = _axis_splits(
        geometry.frame_height, geometry.n, geometry.cell_height, s)
    col_starts, col_lens = _axis_splits(
        geometry.frame_width, geometry.n, geometry.cell_width, s)
    counts = np.outer(row_lens, col_lens).astype(np.float64)[:, :, None]
    return row_starts, col_starts, counts


def _block_means(pixels: np.ndarray, geometry: GridGeometry, s: int) -> np.ndarray:
    """(n*n, 3*s*s) per-cell sub-block mean RGB in [0, 1]."""
    row_starts, col_starts, counts = _split_plan(geometry, s)
    sums = np.add.reduceat(pixels, row_starts, axis=0, dtype=np.float64)
    sums = np.add.reduceat(sums, col_starts, axis=1)
    means = sums / (counts * 255.0)
    n = geometry.n
    blocks = means.reshape(n, s, n, s, 3).transpose(0, 2, 1, 3, 4)
    return blocks.reshape(n * n, 3 * s * s)


def _flow_means(flow: np.ndarray, geometry: GridGeometry,
                max_displacement: float) -> np.ndarray:
    """(n*n, 2) per-cell mean flow mapped into [0, 1], zero motion at 0.5."""
    row_starts, col_starts, counts = _split_plan(geometry, 1)
    sums = np.add.reduceat(flow, row_starts, axis=0, dtype=np.float64)
    sums = np.add.reduceat(sums, col_starts, axis=1)
    means = sums / counts
    scaled = 0.5 + 0.5 * (means / max_displacement)
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return scaled.reshape(geometry.n * geometry.n, 2)


def feature_config(frame: Frame, geometry: GridGeometry,
                   scheme: FeatureScheme) -> Configuration:
    """Build the feature configuration of one frame.

    Pure and deterministic: identical pixel content always produces
    bit-identical feature vectors, which downstream energy math relies on
    to report exactly zero surprise for unchanged cells.
    """
    if (frame.width, frame.height) != (geometry.frame_width, geometry.frame_height):
        raise InvalidFrameError(
            f"frame {frame.index} is {frame.width}x{frame.height}, geometry "
            f"expects {geometry.frame_width}x{geometry.frame_height}")
    if scheme.include_flow and frame.flow is None:
        raise MissingFlowError(f"frame {frame.index}: scheme requires a flow map")

    pixels = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(
        frame.height, frame.width, 3)
    feats = _block_means(pixels, geometry, scheme.splits)
    if scheme.include_flow:
        flow = np.ascontiguousarray(frame.flow, dtype=np.float64)
        feats = np.hstack([feats, _flow_means(flow, geometry,
                                              scheme.max_displacement)])
    return Configuration(
        geometry=geometry,
        features=feats,
        energies=np.zeros(geometry.n * geometry.n, dtype=np.float64),
        frame_index=frame.index,
    )
