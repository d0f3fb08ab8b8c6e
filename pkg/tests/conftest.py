"""Shared synthetic-video fixtures.

Every generator here is seeded and returns analytically known ground truth
(square centers, regime switch frames) so tests can score the engine
against an oracle instead of against itself.
"""

from __future__ import annotations

import numpy as np
import pytest

from egogaze.features import Frame
from egogaze.formats import write_ppm


def frame_from_array(arr: np.ndarray, index: int) -> Frame:
    assert arr.dtype == np.uint8 and arr.ndim == 3 and arr.shape[2] == 3
    return Frame(width=arr.shape[1], height=arr.shape[0],
                 pixels=arr.tobytes(), index=index)


def gray_frame(width: int, height: int, value: int, index: int) -> Frame:
    arr = np.full((height, width, 3), value, dtype=np.uint8)
    return frame_from_array(arr, index)


def constant_frames(count: int, width: int = 640, height: int = 480,
                    value: int = 128):
    for i in range(count):
        yield gray_frame(width, height, value, i)


def moving_square_video(frames: int = 300, width: int = 640, height: int = 480,
                        square: int = 40, step: int = 4, seed: int = 7):
    """Bright textured square over a static textured background.

    The square is a rigid 40-px patch advancing `step` px per frame,
    alternating x and y legs and bouncing inside a central box (egocentric
    targets concentrate around the frame center). Both the patch and the
    background carry blocky texture so partial cell coverage registers in
    the sub-block features; a flat patch would collapse to a constant
    feature vector and zero out the correlation term. Returns (frame list,
    center list); the centers are the tracking ground truth.
    """
    rng = np.random.default_rng(seed)
    blocks = rng.integers(0, 200, size=(height // 10, width // 10, 3),
                          dtype=np.uint8)
    background = np.repeat(np.repeat(blocks, 10, axis=0), 10, axis=1)
    patch_blocks = rng.integers(160, 256, size=(square // 5, square // 5, 3),
                                dtype=np.uint8)
    patch = np.repeat(np.repeat(patch_blocks, 5, axis=0), 5, axis=1)

    x, y = 210, 165
    vx, vy = step, step
    x_lo, x_hi = 170, width - 170 - square
    y_lo, y_hi = 135, height - 135 - square

    out_frames = []
    centers = []
    for i in range(frames):
        if i % 2 == 0:
            x += vx
            if x < x_lo or x > x_hi:
                vx = -vx
                x += 2 * vx
        else:
            y += vy
            if y < y_lo or y > y_hi:
                vy = -vy
                y += 2 * vy
        arr = background.copy()
        arr[y:y + square, x:x + square] = patch
        out_frames.append(frame_from_array(arr, i))
        centers.append((x + square / 2.0, y + square / 2.0))
    return out_frames, centers


def two_regime_video(frames: int = 200, switch: int | None = 100,
                     width: int = 320, height: int = 240, jitter: int = 8,
                     seed: int = 4711):
    """Two static base textures with small per-frame noise.

    The base texture swaps at `switch` (None keeps one regime throughout);
    within a regime consecutive frames stay highly correlated, across the
    swap they decorrelate, so configuration energy jumps exactly once.
    """
    rng = np.random.default_rng(seed)
    base_a = rng.integers(0, 256, size=(height, width, 3), dtype=np.int16)
    base_b = rng.integers(0, 256, size=(height, width, 3), dtype=np.int16)
    for i in range(frames):
        base = base_a if switch is None or i < switch else base_b
        noise = rng.integers(-jitter, jitter + 1, size=base.shape, dtype=np.int16)
        arr = np.clip(base + noise, 0, 255).astype(np.uint8)
        yield frame_from_array(arr, i)


def write_frames_dir(path, frames) -> None:
    path.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        write_ppm(path / f"{frame.index:06d}.ppm", frame.width, frame.height,
                  frame.pixels)


@pytest.fixture(scope="session")
def constant_dir(tmp_path_factory):
    """20 constant mid-gray 64x48 frames on disk, for CLI round trips."""
    path = tmp_path_factory.mktemp("constant") / "frames"
    write_frames_dir(path, constant_frames(20, width=64, height=48))
    return path
