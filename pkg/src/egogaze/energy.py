"""Bond-energy math: appearance/motion dissimilarities and the tanh bond energy.

The appearance term is the cosine distance 1 - cos(u, v); the motion term
is a Pearson-correlation dissimilarity (1 - r)/2 by default, with the raw
mean-centered covariance available behind a mode flag. Both are evaluated
through normalized-difference identities,

    1 - cos(u, v)  =  ||u/|u| - v/|v|||^2 / 2
    (1 - r(u, v))/2  =  ||uc/|uc| - vc/|vc|||^2 / 4

so that bit-identical inputs yield exactly 0.0 rather than rounding noise;
unchanged video content must produce exactly zero surprise downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .lattice import Configuration

PEARSON = "pearson-dissimilarity"
RAW_COVARIANCE = "raw-covariance"
MOTION_MODES = (PEARSON, RAW_COVARIANCE)


@dataclass(frozen=True)
class EnergyParams:
    """Scale and cap for bond energies.

    w_s scales every bond energy; alpha caps the combined dissimilarity so
    the energy cannot blow up. Defaults keep bond energies in [0, tanh(1)].
    """

    w_s: float = 1.0
    alpha: float = 1.0
    motion_mode: str = PEARSON

    def __post_init__(self) -> None:
        if not self.w_s > 0:
            raise ConfigError(f"w_s must be > 0, got {self.w_s}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.motion_mode not in MOTION_MODES:
            raise ConfigError(f"unknown motion mode {self.motion_mode!r}")

    @property
    def max_bond_energy(self) -> float:
        """Upper bound w_s * tanh(alpha) of any single bond energy."""
        return self.w_s * math.tanh(self.alpha)


def _pair(u, v, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError("feature vectors must be 1-D")
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < min_len:
        raise DimensionError(f"need length >= {min_len}, got {a.shape[0]}")
    return a, b


def phi_appearance(u, v) -> float:
    """Cosine distance 1 - cos(u, v) in [0, 2].

    Degenerate norms are pinned: both vectors zero -> 0, exactly one
    zero -> 1 (maximally uninformative, matching cos = 0).
    """
    a, b = _pair(u, v, 1)
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    d = a / na - b / nb
    return 0.5 * float(d @ d)


def phi_motion(u, v, mode: str = PEARSON) -> float:
    """Motion-affinity term between two feature vectors.

    Pearson mode returns (1 - r)/2 in [0, 1], with r the correlation of the
    mean-centered vectors; a constant vector on either side yields 0.
    Raw-covariance mode returns the literal mean-centered covariance
    sum((u - mean(u)) * (v - mean(v))) / len, which is a similarity and may
    be negative.
    """
    if mode not in MOTION_MODES:
        raise ConfigError(f"unknown motion mode {mode!r}")
    a, b = _pair(u, v, 2)
    ca = a - a.mean()
    cb = b - b.mean()
    if mode == RAW_COVARIANCE:
        return float(ca @ cb) / a.shape[0]
    na = math.sqrt(float(ca @ ca))
    nb = math.sqrt(float(cb @ cb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    d = ca / na - cb / nb
    return 0.25 * float(d @ d)


def phi_combined(u, v, params: EnergyParams) -> float:
    """min(alpha, phi_appearance + phi_motion), floored at 0.

    The floor only matters in raw-covariance mode, where the motion term
    can be negative; the combined dissimilarity is non-negative by contract.
    """
    total = phi_appearance(u, v) + phi_motion(u, v, params.motion_mode)
    return max(0.0, min(params.alpha, total))


def bond_energy(u, v, params: EnergyParams) -> float:
    """w_s * tanh(phi_combined), in [0, w_s * tanh(alpha)]."""
    return params.w_s * math.tanh(phi_combined(u, v, params))


def pairwise_bond_energies(current: Configuration, past: Configuration,
                           params: EnergyParams) -> np.ndarray:
    """Per-cell bond energies between two same-geometry configurations.

    Row-vectorized equivalent of bond_energy(current cell, past cell) for
    every cell; this is the hot path of temporal aggregation.
    """
    ua, za, ca, ka = current.normalized()
    ub, zb, cb, kb = past.normalized()

    d = ua - ub
    pa = 0.5 * np.einsum("ij,ij->i", d, d)
    both_zero = za & zb
    if both_zero.any():
        pa[both_zero] = 0.0
    one_zero = za ^ zb
    if one_zero.any():
        pa[one_zero] = 1.0

    if params.motion_mode == PEARSON:
        dm = ca - cb
        pm = 0.25 * np.einsum("ij,ij->i", dm, dm)
        const = ka | kb
        if const.any():
            pm[const] = 0.0
    else:
        fa = current.features
        fb = past.features
        ra = fa - fa.mean(axis=1, keepdims=True)
        rb = fb - fb.mean(axis=1, keepdims=True)
        pm = np.einsum("ij,ij->i", ra, rb) / fa.shape[1]

    phi = pa + pm
    np.minimum(phi, params.alpha, out=phi)
    np.maximum(phi, 0.0, out=phi)
    return params.w_s * np.tanh(phi)


def configuration_energy(surprise) -> float:
    """Total configuration energy: the sum of per-cell aggregated surprise.

    Accepts a SurpriseMap or a bare array of per-cell values. Higher energy
    means higher surprise.
    """
    values = getattr(surprise, "values", surprise)
    return float(np.sum(values))
