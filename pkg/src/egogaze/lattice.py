"""Lattice substrate: grid geometry, generators, bonds, configurations.

A video frame is tiled by an N x N grid of cells. Each cell hosts one
generator (its feature vector plus a surprise energy); generators are
linked to their 4-neighbors by spatial bonds and to their own past by
temporal bonds. The lattice topology is static, so bonds are kept
implicit in the grid adjacency and only materialized on request.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

LATTICE_TOPOLOGY = "lattice"


@dataclass(frozen=True)
class GridGeometry:
    """Integral tiling of a frame by an N x N grid.

    Interior cells are floor(width/n) x floor(height/n); the last row and
    column absorb the remainder pixels so the union of cells tiles the
    frame exactly.
    """

    frame_width: int
    frame_height: int
    n: int
    cell_width: int
    cell_height: int

    def cell_extent(self, row: int, col: int) -> tuple[int, int, int, int]:
        """Top-left pixel offset and pixel size (x, y, w, h) of a cell."""
        x = col * self.cell_width
        y = row * self.cell_height
        w = self.cell_width if col < self.n - 1 else self.frame_width - x
        h = self.cell_height if row < self.n - 1 else self.frame_height - y
        return x, y, w, h

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        x, y, w, h = self.cell_extent(row, col)
        return x + 0.5 * w, y + 0.5 * h

    @property
    def offsets(self) -> np.ndarray:
        """(n, n, 2) array of per-cell top-left (x, y) pixel offsets."""
        cols = np.arange(self.n) * self.cell_width
        rows = np.arange(self.n) * self.cell_height
        out = np.empty((self.n, self.n, 2), dtype=np.int64)
        out[:, :, 0] = cols[None, :]
        out[:, :, 1] = rows[:, None]
        return out

    @property
    def center_cell(self) -> tuple[int, int]:
        return self.n // 2, self.n // 2

    def cell_at(self, x: int, y: int) -> tuple[int, int]:
        """Cell containing pixel (x, y); remainder pixels map to the last row/col."""
        return (min(y // self.cell_height, self.n - 1),
                min(x // self.cell_width, self.n - 1))


def build_geometry(frame_width: int, frame_height: int, n: int) -> GridGeometry:
    """Tile a frame_width x frame_height frame with an n x n grid."""
    if n < 2:
        raise GeometryError(f"grid side must be >= 2, got {n}")
    if frame_width < n or frame_height < n:
        raise GeometryError(
            f"frame {frame_width}x{frame_height} too small for a {n}x{n} grid")
    return GridGeometry(
        frame_width=frame_width,
        frame_height=frame_height,
        n=n,
        cell_width=frame_width // n,
        cell_height=frame_height // n,
    )


def spatial_arity(n: int, row: int, col: int) -> int:
    """Number of spatial bonds (in + out) a cell exposes: its 4-neighbor degree."""
    return 4 - (row in (0, n - 1)) - (col in (0, n - 1))


@dataclass
class Generator:
    """One lattice cell: feature vector, surprise energy, bond count."""

    row: int
    col: int
    features: np.ndarray
    energy: float
    arity: int


@dataclass(frozen=True)
class Bond:
    """Directed link between two generators.

    Endpoints are (row, col, time_offset) triples; spatial bonds stay
    within one configuration (offset 0), temporal bonds reach back 1..k
    frames. Each undirected spatial adjacency is stored once as the
    out-bond of its origin cell; the paired in-bond is implied.
    """

    from_cell: tuple[int, int, int]
    to_cell: tuple[int, int, int]
    direction: str  # "in" | "out"
    kind: str       # "spatial" | "temporal"
    energy: float


def reversed_bond(bond: Bond) -> Bond:
    """The paired view of a bond from its destination's perspective."""
    return Bond(
        from_cell=bond.to_cell,
        to_cell=bond.from_cell,
        direction="in" if bond.direction == "out" else "out",
        kind=bond.kind,
        energy=bond.energy,
    )


@dataclass(eq=False)
class Configuration:
    """N x N lattice of generators at one frame.

    Generator state is stored as flat arrays (row-major, index = row*n + col)
    so per-frame math stays vectorized; `generator()` builds an object view
    on demand. Treat instances as immutable once constructed.
    """

    geometry: GridGeometry
    features: np.ndarray          # (n*n, dim) float64
    energies: np.ndarray          # (n*n,) float64
    frame_index: int
    topology: str = LATTICE_TOPOLOGY
    bonds: tuple[Bond, ...] | None = None

    # normalized views reused by temporal aggregation, built lazily
    _unit: np.ndarray | None = field(default=None, repr=False)
    _zero_rows: np.ndarray | None = field(default=None, repr=False)
    _centered_unit: np.ndarray | None = field(default=None, repr=False)
    _const_rows: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        n = self.geometry.n
        if self.features.shape[0] != n * n:
            raise GeometryError(
                f"configuration needs {n * n} generators, got {self.features.shape[0]}")

    @property
    def n(self) -> int:
        return self.geometry.n

    def generator(self, row: int, col: int) -> Generator:
        i = row * self.n + col
        return Generator(
            row=row,
            col=col,
            features=self.features[i],
            energy=float(self.energies[i]),
            arity=spatial_arity(self.n, row, col),
        )

    @property
    def generators(self) -> list[list[Generator]]:
        return [[self.generator(r, c) for c in range(self.n)] for r in range(self.n)]

    def normalized(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Row-unit features and mean-centered row-unit features, with
        masks flagging zero-norm and constant rows. Cached after first use."""
        if self._unit is None:
            f = self.features
            norms = np.linalg.norm(f, axis=1)
            zero = norms == 0.0
            unit = np.divide(f, norms[:, None], out=np.zeros_like(f),
                             where=~zero[:, None])
            centered = f - f.mean(axis=1, keepdims=True)
            cnorms = np.linalg.norm(centered, axis=1)
            const = cnorms == 0.0
            cunit = np.divide(centered, cnorms[:, None], out=np.zeros_like(f),
                              where=~const[:, None])
            self._unit, self._zero_rows = unit, zero
            self._centered_unit, self._const_rows = cunit, const
        return self._unit, self._zero_rows, self._centered_unit, self._const_rows


def lattice_bonds(config: Configuration) -> Configuration:
    """Materialize the spatial bond list of a lattice configuration.

    Emits one out-bond per undirected 4-neighbor adjacency (right and down
    from each cell), 2n(n-1) bonds total, all at the default energy 1.0.
    """
    n = config.geometry.n
    bonds = []
    for r in range(n):
        for c in range(n):
            if c + 1 < n:
                bonds.append(Bond((r, c, 0), (r, c + 1, 0), "out", "spatial", 1.0))
            if r + 1 < n:
                bonds.append(Bond((r, c, 0), (r + 1, c, 0), "out", "spatial", 1.0))
    return Configuration(
        geometry=config.geometry,
        features=config.features,
        energies=config.energies,
        frame_index=config.frame_index,
        topology=config.topology,
        bonds=tuple(bonds),
    )
