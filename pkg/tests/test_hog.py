import time

import numpy as np
import pytest

from pedintent.errors import DataError
from pedintent.features.hog import HogParams, hog, hog_dimension
from pedintent.features.image import GrayImage


def test_dimension_law_220():
    assert hog_dimension(220, 220) == 3600


def test_dimension_law_formula():
    for w, h in ((40, 40), (220, 220), (60, 100), (40, 220)):
        expect = (w // 20 - 1) * (h // 20 - 1) * 36
        assert hog_dimension(w, h) == expect


def test_dimension_rejects_bad_sizes():
    with pytest.raises(DataError):
        hog_dimension(221, 220)
    with pytest.raises(DataError):
        hog_dimension(20, 220)  # one cell wide: smaller than a block


def test_params_validation():
    with pytest.raises(DataError):
        HogParams(cell_size=0)
    with pytest.raises(DataError):
        HogParams(signed=True)
    with pytest.raises(DataError):
        HogParams(block_size=2, block_stride=3)


def test_constant_image_gives_exact_zeros():
    img = GrayImage(np.full((40, 40), 0.4))
    vec = hog(img)
    assert vec.values.shape == (36,)
    assert np.all(vec.values == 0.0)


def test_output_length_on_220():
    rng = np.random.default_rng(0)
    img = GrayImage(rng.random((220, 220)))
    vec = hog(img)
    assert vec.values.size == 3600
    assert np.isfinite(vec.values).all()


def test_invariant_under_constant_shift_exact_on_dyadic_pixels():
    # pixels on a 1/64 grid shifted by 16/64: all differences exact in
    # binary floating point, so the descriptors must be bit-identical
    rng = np.random.default_rng(1)
    base = rng.integers(0, 32, size=(60, 40)) / 64.0
    a = hog(GrayImage(base))
    b = hog(GrayImage(base + 0.25))
    assert np.array_equal(a.values, b.values)


def test_invariant_under_constant_shift_general():
    rng = np.random.default_rng(1)
    base = rng.random((60, 40)) * 0.5
    a = hog(GrayImage(base))
    b = hog(GrayImage(base + 0.3))
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_scaling_changes_blocks_only_at_epsilon_level():
    rng = np.random.default_rng(2)
    base = rng.random((60, 60)) * 0.5
    ref = hog(GrayImage(base)).values
    for c in (0.5, 2.0):
        scaled = hog(GrayImage(base * c)).values
        assert np.max(np.abs(scaled - ref)) < 1e-6


def test_block_norms_at_most_one():
    rng = np.random.default_rng(3)
    img = GrayImage(rng.random((100, 80)))
    vec = hog(img).values.reshape(-1, 36)
    norms = np.sqrt((vec * vec).sum(axis=1))
    assert np.all(norms <= 1.0 + 1e-12)
    assert np.all(norms > 0.99)  # noise image: every block has energy


def _hog_oracle(px, cell=20, bins=9):
    """Scalar reference: loops over pixels, blocks of 2x2 cells, stride 1."""
    h, w = px.shape
    cy, cx = h // cell, w // cell
    pad = np.pad(px, 1, mode="edge")
    hist = np.zeros((cy, cx, bins))
    for r in range(h):
        for c in range(w):
            gx = pad[r + 1, c + 2] - pad[r + 1, c]
            gy = pad[r + 2, c + 1] - pad[r, c + 1]
            mag = np.hypot(gx, gy)
            ang = np.degrees(np.arctan2(gy, gx)) % 180.0
            pos = (ang - 10.0) / 20.0
            b0 = int(np.floor(pos))
            frac = pos - b0
            fr = (r + 0.5) / cell - 0.5
            fc = (c + 0.5) / cell - 0.5
            i0, j0 = int(np.floor(fr)), int(np.floor(fc))
            fi, fj = fr - i0, fc - j0
            for ci, wi in ((i0, 1 - fi), (i0 + 1, fi)):
                if not 0 <= ci < cy:
                    continue
                for cj, wj in ((j0, 1 - fj), (j0 + 1, fj)):
                    if not 0 <= cj < cx:
                        continue
                    hist[ci, cj, b0 % bins] += wi * wj * (1 - frac) * mag
                    hist[ci, cj, (b0 + 1) % bins] += wi * wj * frac * mag
    out = []
    for by in range(cy - 1):
        for bx in range(cx - 1):
            v = hist[by:by + 2, bx:bx + 2].ravel()
            out.append(v / np.sqrt(v @ v + 1e-10))
    return np.concatenate(out)


def test_matches_scalar_oracle():
    rng = np.random.default_rng(4)
    px = rng.random((60, 40))
    got = hog(GrayImage(px)).values
    expect = _hog_oracle(px)
    assert got.shape == expect.shape
    assert np.max(np.abs(got - expect)) < 1e-10


def test_horizontal_step_votes_vertical_bin():
    # a vertical edge produces horizontal gradients: angle 0 degrees,
    # which splits evenly between the bins at 10 and 170 degrees
    px = np.zeros((40, 40))
    px[:, 20:] = 1.0
    vec = hog(GrayImage(px)).values.reshape(4, 9)
    total = vec.sum(axis=0)
    others = np.delete(total, [0, 8])
    assert total[0] > 0 and total[8] > 0
    assert total[0] == pytest.approx(total[8], rel=1e-9)
    assert np.all(others == 0.0)


def test_runtime_under_50ms():
    rng = np.random.default_rng(5)
    img = GrayImage(rng.random((220, 220)))
    hog(img)  # warm caches
    start = time.perf_counter()
    hog(img)
    elapsed = time.perf_counter() - start
    assert elapsed < 0.050
