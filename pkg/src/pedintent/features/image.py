"""Grayscale conversion and bilinear resizing.

All descriptor code downstream works on GrayImage: a float64 matrix with
intensities in [0, 1], row-major, origin at the top-left corner.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

# Luma coefficients 0.2989 / 0.5870 / 0.1140 renormalized so they sum to
# exactly 1.0: the blue weight is computed as 1 - wr - wg, which makes
# gray inputs (r == g == b) exact fixed points of the conversion.
_LUMA_SUM = 0.2989 + 0.5870 + 0.1140
WEIGHT_R = 0.2989 / _LUMA_SUM
WEIGHT_G = 0.5870 / _LUMA_SUM
WEIGHT_B = 1.0 - WEIGHT_R - WEIGHT_G


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image, pixels shaped (height, width) in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise DataError("GrayImage needs a non-empty 2-d pixel array")
        if not np.isfinite(px).all():
            raise DataError("GrayImage pixels must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise DataError("GrayImage pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def to_gray(rgb):
    """Convert an RGB image to GrayImage.

    Accepts (h, w, 3) uint8 in [0, 255] or float in [0, 1]. The weighted
    sum is arranged as b + wr*(r - b) + wg*(g - b) so that r == g == b
    maps to exactly that value.
    """
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DataError("expected an (h, w, 3) RGB array")
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float64) / 255.0
    else:
        arr = arr.astype(np.float64)
        if not np.isfinite(arr).all():
            raise DataError("RGB pixels must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DataError("float RGB pixels must lie in [0, 1]")
    r, g, b = arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]
    gray = b + WEIGHT_R * (r - b) + WEIGHT_G * (g - b)
    # rounding in the two correction terms can nudge values past the ends
    np.clip(gray, 0.0, 1.0, out=gray)
    return GrayImage(gray)


def _bilinear_gather(px, ys, xs):
    """Sample px at float coordinates (ys, xs) with edge clamping.

    The interpolation is written as v00 + fx*(v01 - v00) + fy*(v10 - v00)
    + fx*fy*(v00 + v11 - v01 - v10): algebraically the usual bilinear
    form, but exact whenever the four corners agree (and wherever the
    fractional parts are exactly zero).
    """
    h, w = px.shape
    ys = np.clip(ys, 0.0, float(h - 1))
    xs = np.clip(xs, 0.0, float(w - 1))
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.minimum(y0, h - 2) if h > 1 else y0
    x0 = np.minimum(x0, w - 2) if w > 1 else x0
    fy = ys - y0
    fx = xs - x0
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    v00 = px[y0, x0]
    v01 = px[y0, x1]
    v10 = px[y1, x0]
    v11 = px[y1, x1]
    return v00 + fx * (v01 - v00) + fy * (v10 - v00) + fx * fy * (v00 + v11 - v01 - v10)


def resize(img, width, height):
    """Bilinear resize to width x height, sample points at pixel centers.

    Source coordinates are (dst + 0.5) * scale - 0.5; out-of-range samples
    clamp to the border. Resizing to the same size reproduces the input
    exactly.
    """
    if width < 1 or height < 1:
        raise DataError("resize target must be at least 1x1")
    px = img.pixels
    sy = img.height / float(height)
    sx = img.width / float(width)
    ys = (np.arange(height, dtype=np.float64) + 0.5) * sy - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * sx - 0.5
    grid_y = np.repeat(ys, width)
    grid_x = np.tile(xs, height)
    out = _bilinear_gather(px, grid_y, grid_x).reshape(height, width)
    np.clip(out, 0.0, 1.0, out=out)
    return GrayImage(out)
