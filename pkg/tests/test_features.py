import numpy as np
import pytest

from egogaze.errors import ConfigError, InvalidFrameError, MissingFlowError
from egogaze.features import (FeatureScheme, Frame, MEAN_RGB, SUBBLOCK,
                              feature_config)
from egogaze.lattice import build_geometry

from conftest import frame_from_array, gray_frame


def brute_force_features(arr, geometry, splits):
    """Naive per-cell, per-sub-block mean, the oracle for the reduceat path."""
    n = geometry.n
    out = np.zeros((n * n, 3 * splits * splits))
    for r in range(n):
        for c in range(n):
            x0, y0, w, h = geometry.cell_extent(r, c)
            sw, sh = w // splits, h // splits
            vec = []
            for sr in range(splits):
                for sc in range(splits):
                    ys = y0 + sr * sh
                    xs = x0 + sc * sw
                    ye = y0 + h if sr == splits - 1 else ys + sh
                    xe = x0 + w if sc == splits - 1 else xs + sw
                    block = arr[ys:ye, xs:xe].astype(np.float64)
                    vec.extend(block.mean(axis=(0, 1)) / 255.0)
            out[r * n + c] = vec
    return out


def test_uniform_gray_frame_features():
    geo = build_geometry(640, 480, 16)
    cfg = feature_config(gray_frame(640, 480, 128, 0), geo, FeatureScheme())
    assert cfg.features.shape == (256, 48)
    assert np.all(cfg.features == 128.0 / 255.0)
    assert np.all(cfg.energies == 0.0)


def test_default_scheme_dimensions():
    scheme = FeatureScheme()
    assert scheme.mode == SUBBLOCK and scheme.subblock == 4
    assert scheme.dim == 48
    assert FeatureScheme(mode=MEAN_RGB).dim == 3
    assert FeatureScheme(include_flow=True).dim == 50


def test_half_black_half_white_mean_rgb():
    arr = np.zeros((480, 640, 3), dtype=np.uint8)
    arr[:, 320:] = 255
    geo = build_geometry(640, 480, 2)
    cfg = feature_config(frame_from_array(arr, 0), geo,
                         FeatureScheme(mode=MEAN_RGB))
    assert np.all(cfg.generator(0, 0).features == 0.0)
    assert np.all(cfg.generator(1, 0).features == 0.0)
    assert np.all(cfg.generator(0, 1).features == 1.0)
    assert np.all(cfg.generator(1, 1).features == 1.0)


@pytest.mark.parametrize("size,n,mode,splits", [
    ((640, 480), 16, SUBBLOCK, 4),
    ((641, 481), 16, SUBBLOCK, 4),   # remainder cells and remainder sub-blocks
    ((123, 97), 5, SUBBLOCK, 3),
    ((123, 97), 5, MEAN_RGB, 1),
])
def test_features_match_brute_force(size, n, mode, splits):
    rng = np.random.default_rng(hash((size, n, mode)) % 2 ** 32)
    arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    geo = build_geometry(size[0], size[1], n)
    scheme = FeatureScheme(mode=mode, subblock=splits)
    got = feature_config(frame_from_array(arr, 0), geo, scheme).features
    want = brute_force_features(arr, geo, scheme.splits)
    assert got.shape == want.shape
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_locality_one_cell_change():
    rng = np.random.default_rng(77)
    arr = rng.integers(0, 256, size=(480, 640, 3), dtype=np.uint8)
    geo = build_geometry(640, 480, 16)
    scheme = FeatureScheme()
    before = feature_config(frame_from_array(arr, 0), geo, scheme).features
    changed = arr.copy()
    x0, y0, w, h = geo.cell_extent(5, 9)
    changed[y0:y0 + h, x0:x0 + w] = 255 - changed[y0:y0 + h, x0:x0 + w]
    after = feature_config(frame_from_array(changed, 1), geo, scheme).features
    diff_rows = np.any(before != after, axis=1)
    assert diff_rows.sum() == 1
    assert diff_rows[5 * 16 + 9]


def test_features_bounded_and_deterministic():
    rng = np.random.default_rng(5)
    arr = rng.integers(0, 256, size=(97, 123, 3), dtype=np.uint8)
    geo = build_geometry(123, 97, 7)
    a = feature_config(frame_from_array(arr, 0), geo, FeatureScheme()).features
    b = feature_config(frame_from_array(arr, 0), geo, FeatureScheme()).features
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_flow_channels():
    geo = build_geometry(64, 48, 4)
    flow = np.zeros((48, 64, 2), dtype=np.float32)
    flow[:, :, 0] = 10.0    # dx = half of max_displacement
    flow[:, :, 1] = -40.0   # dy beyond the limit, clipped
    frame = Frame(width=64, height=48, pixels=bytes(64 * 48 * 3), index=0,
                  flow=flow)
    scheme = FeatureScheme(include_flow=True, max_displacement=20.0)
    feats = feature_config(frame, geo, scheme).features
    assert feats.shape == (16, 50)
    assert np.allclose(feats[:, 48], 0.75)
    assert np.all(feats[:, 49] == 0.0)


def test_zero_flow_sits_at_half():
    geo = build_geometry(64, 48, 4)
    frame = Frame(width=64, height=48, pixels=bytes(64 * 48 * 3), index=0,
                  flow=np.zeros((48, 64, 2), dtype=np.float32))
    feats = feature_config(frame, geo, FeatureScheme(include_flow=True)).features
    assert np.all(feats[:, 48:] == 0.5)


def test_missing_flow_error():
    geo = build_geometry(64, 48, 4)
    frame = gray_frame(64, 48, 10, 0)
    with pytest.raises(MissingFlowError):
        feature_config(frame, geo, FeatureScheme(include_flow=True))


def test_dimension_mismatch_error():
    geo = build_geometry(64, 48, 4)
    with pytest.raises(InvalidFrameError):
        feature_config(gray_frame(32, 48, 10, 0), geo, FeatureScheme())


def test_frame_validation():
    with pytest.raises(InvalidFrameError):
        Frame(width=4, height=4, pixels=bytes(10), index=0)
    with pytest.raises(InvalidFrameError):
        Frame(width=4, height=4, pixels=bytes(48), index=0,
              flow=np.zeros((2, 2, 2), dtype=np.float32))


def test_scheme_validation():
    with pytest.raises(ConfigError):
        FeatureScheme(mode="hog")
    with pytest.raises(ConfigError):
        FeatureScheme(subblock=0)
    with pytest.raises(ConfigError):
        FeatureScheme(max_displacement=0.0)
