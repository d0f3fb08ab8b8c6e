"""Evaluation kit: angular gaze error and clustering-based segmentation accuracy.

AAE converts pixel coordinates to view rays under a pinhole camera with a
configurable horizontal field of view and averages the angle between
predicted and ground-truth rays. Segmentation accuracy clusters predicted
segments by their mean feature vector, aligns cluster ids to ground-truth
classes with the Hungarian method, and counts matched frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, EmptyEvaluationError


@dataclass(frozen=True)
class CameraModel:
    """Pinhole model mapping pixels to view rays."""

    width: int
    height: int
    hfov_degrees: float = 60.0

    def __post_init__(self) -> None:
        if not 0.0 < self.hfov_degrees < 180.0:
            raise ConfigError(
                f"horizontal FOV must be in (0, 180), got {self.hfov_degrees}")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.hfov_degrees) / 2.0)


@dataclass(frozen=True)
class GazeRecord:
    """One frame's gaze point; ground truth may be missing (valid=False)."""

    frame_index: int
    x: float
    y: float
    valid: bool = True


def _ray(record: GazeRecord, cam: CameraModel) -> np.ndarray:
    return np.array([record.x - cam.width / 2.0,
                     record.y - cam.height / 2.0,
                     cam.focal_px])


def aae(pred: list[GazeRecord], truth: list[GazeRecord],
        cam: CameraModel) -> float:
    """Average angular error in degrees over frames valid on both sides."""
    truth_by_frame = {r.frame_index: r for r in truth}
    angles = []
    for p in pred:
        t = truth_by_frame.get(p.frame_index)
        if t is None or not t.valid or not p.valid:
            continue
        vp = _ray(p, cam)
        vt = _ray(t, cam)
        # atan2 form of the arccos(cos-similarity) angle: exact 0 for
        # coincident rays and stable near 0 and pi
        cross = float(np.linalg.norm(np.cross(vp, vt)))
        angles.append(math.degrees(math.atan2(cross, float(vp @ vt))))
    if not angles:
        raise EmptyEvaluationError("no frames with valid gaze on both sides")
    return float(np.mean(angles))


def kmeans(points, k: int, seed: int, max_iter: int = 100,
           tol: float = 1e-4, objective_trace: list | None = None) -> np.ndarray:
    """Seeded Lloyd iterations from a k-means++ init.

    Deterministic given the seed. Empty clusters are re-seeded to the point
    farthest from its assigned centroid. Returns one label per point; when
    given, objective_trace collects the within-cluster sum of squares after
    each assignment step.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ConfigError("kmeans needs a non-empty 2-D point array")
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in [1, {n}], got {k}")

    rng = np.random.default_rng(seed)
    centers = np.empty((k, pts.shape[1]), dtype=np.float64)
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = pts[idx]
        np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1), out=d2)

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dists = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dists, axis=1)
        assigned = dists[np.arange(n), labels]
        for j in range(k):
            if not np.any(labels == j):
                far = int(np.argmax(assigned))
                centers[j] = pts[far]
                labels[far] = j
                assigned[far] = 0.0
        if objective_trace is not None:
            objective_trace.append(float(assigned.sum()))
        new_centers = np.empty_like(centers)
        for j in range(k):
            new_centers[j] = pts[labels == j].mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < tol:
            break
    return labels


def hungarian(cost) -> np.ndarray:
    """Minimum-cost assignment of a square cost matrix.

    Returns the permutation p with p[row] = column. Maximization problems
    are handled by negating the matrix before calling.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ConfigError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ConfigError("cost matrix entries must be finite")
    rows, cols = linear_sum_assignment(c)
    perm = np.empty(c.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def _boundary_frames(boundaries) -> list[int]:
    return [getattr(b, "frame_index", b) for b in boundaries]


def _segment_slices(boundary_frames: list[int], start: int,
                    end: int) -> list[tuple[int, int]]:
    cuts = sorted(f for f in boundary_frames if start < f < end)
    edges = [start] + cuts + [end]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def _accuracy_for_range(boundary_frames, features, labels, k, seed,
                        start, end) -> float:
    segs = _segment_slices(boundary_frames, start, end)
    means = np.stack([features[a:b].mean(axis=0) for a, b in segs])
    seg_labels = kmeans(means, k, seed)
    pred = np.empty(end - start, dtype=np.int64)
    for (a, b), lab in zip(segs, seg_labels):
        pred[a - start:b - start] = lab
    confusion = np.zeros((k, k), dtype=np.float64)
    np.add.at(confusion, (pred, labels[start:end]), 1.0)
    perm = hungarian(-confusion)
    matched = float(confusion[np.arange(k), perm].sum())
    return matched / (end - start)


def segmentation_accuracy(boundaries, frame_features, truth_labels, k: int,
                          seed: int, videos=None) -> float:
    """Hungarian-aligned frame accuracy of a boundary-based segmentation.

    Boundaries (EventBoundary objects or frame indices) partition the frame
    range into segments; each segment is represented by its mean feature
    vector and clustered into k labels. With `videos` (a list of inclusive
    (start_frame, end_frame) ranges) the accuracy is computed independently
    per video and averaged, mirroring streaming per-video evaluation.
    """
    features = np.asarray(frame_features, dtype=np.float64)
    labels = np.asarray(truth_labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ConfigError(
            f"features ({features.shape}) and labels ({labels.shape}) must "
            f"cover the same frames")
    total = features.shape[0]
    if total == 0:
        raise EmptyEvaluationError("no frames to evaluate")
    if labels.min() < 0 or labels.max() >= k:
        raise ConfigError(f"truth labels must lie in [0, {k})")

    frames = _boundary_frames(boundaries)
    if videos is None:
        return _accuracy_for_range(frames, features, labels, k, seed, 0, total)
    accs = []
    for start, end in videos:
        if not 0 <= start <= end < total:
            raise ConfigError(f"video range ({start}, {end}) out of bounds")
        accs.append(_accuracy_for_range(frames, features, labels, k, seed,
                                        start, end + 1))
    return float(np.mean(accs))
