"""Uniform local binary patterns on a circle of 8 neighbors, radius 1.

Neighbor p sits at angle 2*pi*p/8 from the positive x axis (the angle
turns from the column axis toward the row axis) and is sampled
bilinearly. Bit p is set when the neighbor is >= the center. A code is
uniform when its circular bit string has at most two 0/1 transitions; the
58 uniform codes get their own histogram bins (ascending code order) and
everything else shares a final catch-all bin, 59 bins total. The histogram
is collected over interior pixels and L2-normalized.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .featfile import FeatureVector


def _circular_transitions(code, neighbors):
    bits = [(code >> p) & 1 for p in range(neighbors)]
    return sum(bits[p] != bits[(p + 1) % neighbors] for p in range(neighbors))


def _uniform_bin_table(neighbors):
    """Map each code to its histogram bin; non-uniform codes share the last."""
    n_codes = 1 << neighbors
    uniform = [c for c in range(n_codes) if _circular_transitions(c, neighbors) <= 2]
    table = np.full(n_codes, len(uniform), dtype=np.intp)
    for bin_idx, code in enumerate(uniform):
        table[code] = bin_idx
    return table, len(uniform)


@dataclass(frozen=True)
class LbpParams:
    neighbors: int = 8
    radius: float = 1.0
    bins: int = 59

    def __post_init__(self):
        if self.neighbors < 4 or self.neighbors > 16:
            raise DataError("neighbor count out of range")
        if self.radius <= 0.0:
            raise DataError("radius must be positive")
        expected = self.neighbors * (self.neighbors - 1) + 3
        if self.bins != expected:
            raise DataError(
                "bin count %d inconsistent with %d neighbors (expected %d)"
                % (self.bins, self.neighbors, expected)
            )


def lbp_codes(img, params=LbpParams()):
    """Pattern codes for all interior pixels, shape (h - 2m, w - 2m).

    m is ceil(radius). Bilinear samples use the expanded form that is
    exact when the four corner pixels agree, so comparisons are stable
    under monotone remaps of two-valued images.
    """
    px = img.pixels
    margin = int(np.ceil(params.radius))
    h, w = px.shape
    if h <= 2 * margin or w <= 2 * margin:
        raise DataError("image too small for radius %g" % (params.radius,))
    center = px[margin:h - margin, margin:w - margin]
    codes = np.zeros(center.shape, dtype=np.intp)
    for p in range(params.neighbors):
        theta = 2.0 * np.pi * p / params.neighbors
        # trig for the axis-aligned neighbors lands within 1e-16 of the
        # integer offsets; rounding restores them exactly
        dx = round(params.radius * np.cos(theta), 12)
        dy = round(params.radius * np.sin(theta), 12)
        y0 = int(np.floor(dy))
        x0 = int(np.floor(dx))
        fy = dy - y0
        fx = dx - x0
        win = px[margin + y0:h - margin + y0, margin + x0:w - margin + x0]
        if fy == 0.0 and fx == 0.0:
            sampled = win
        else:
            v00 = win
            v01 = px[margin + y0:h - margin + y0, margin + x0 + 1:w - margin + x0 + 1]
            v10 = px[margin + y0 + 1:h - margin + y0 + 1, margin + x0:w - margin + x0]
            v11 = px[margin + y0 + 1:h - margin + y0 + 1,
                     margin + x0 + 1:w - margin + x0 + 1]
            sampled = (v00 + fx * (v01 - v00) + fy * (v10 - v00)
                       + fx * fy * (v00 + v11 - v01 - v10))
        codes |= (sampled >= center).astype(np.intp) << p
    return codes


def lbp(img, params=LbpParams(), sample_id=""):
    """Uniform-pattern histogram of a GrayImage, L2-normalized, length 59."""
    table, n_uniform = _uniform_bin_table(params.neighbors)
    codes = lbp_codes(img, params)
    hist = np.bincount(table[codes.ravel()], minlength=n_uniform + 1)
    hist = hist.astype(np.float64)
    norm = np.sqrt(hist @ hist)
    return FeatureVector(sample_id, "lbp", hist / norm)
