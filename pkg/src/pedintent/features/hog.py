"""Histogram of oriented gradients over a dense cell grid.

Unsigned orientation space [0, 180), 9 bins centered at 10 + 20k degrees,
20x20-pixel cells, 2x2-cell blocks advancing one cell per step, each block
L2-normalized. Gradient magnitude votes are split linearly between the two
nearest orientation bins and bilinearly between the four nearest cells.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .featfile import FeatureVector

NORM_EPS = 1e-10


@dataclass(frozen=True)
class HogParams:
    cell_size: int = 20
    block_size: int = 2
    block_stride: int = 1
    bins: int = 9
    signed: bool = False

    def __post_init__(self):
        if self.cell_size < 1 or self.block_size < 1 or self.bins < 1:
            raise DataError("HOG parameters must be positive")
        if not 1 <= self.block_stride <= self.block_size:
            raise DataError("block stride must be in [1, block_size]")
        if self.signed:
            raise DataError("signed gradients are not supported")


def hog_dimension(width, height, params=HogParams()):
    """Vector length for a width x height input (must tile into cells)."""
    if width % params.cell_size or height % params.cell_size:
        raise DataError(
            "image %dx%d does not tile into %d-pixel cells"
            % (width, height, params.cell_size)
        )
    cells_x = width // params.cell_size
    cells_y = height // params.cell_size
    if cells_x < params.block_size or cells_y < params.block_size:
        raise DataError("image smaller than one block")
    blocks_x = (cells_x - params.block_size) // params.block_stride + 1
    blocks_y = (cells_y - params.block_size) // params.block_stride + 1
    return blocks_x * blocks_y * params.block_size ** 2 * params.bins


def _cell_histograms(px, params):
    """Accumulate magnitude votes into an (cells_y, cells_x, bins) grid."""
    h, w = px.shape
    cell = params.cell_size
    bins = params.bins
    cells_y, cells_x = h // cell, w // cell

    padded = np.pad(px, 1, mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0

    bin_width = 180.0 / bins
    pos = (ang - bin_width / 2.0) / bin_width
    low = np.floor(pos)
    frac = pos - low
    low = low.astype(np.intp)
    b0 = low % bins
    b1 = (low + 1) % bins
    w0 = (1.0 - frac) * mag
    w1 = frac * mag

    # fractional cell coordinates of each pixel (cell centers at .5 offsets)
    cyf = (np.arange(h, dtype=np.float64) + 0.5) / cell - 0.5
    cxf = (np.arange(w, dtype=np.float64) + 0.5) / cell - 0.5
    i0 = np.floor(cyf).astype(np.intp)
    j0 = np.floor(cxf).astype(np.intp)
    fi = cyf - i0
    fj = cxf - j0

    hist = np.zeros(cells_y * cells_x * bins)
    n = hist.size
    for ci, wi in ((i0, 1.0 - fi), (i0 + 1, fi)):
        row_ok = (ci >= 0) & (ci < cells_y)
        for cj, wj in ((j0, 1.0 - fj), (j0 + 1, fj)):
            col_ok = (cj >= 0) & (cj < cells_x)
            valid = row_ok[:, None] & col_ok[None, :]
            spatial = wi[:, None] * wj[None, :]
            base = (ci[:, None] * cells_x + cj[None, :]) * bins
            for bb, wb in ((b0, w0), (b1, w1)):
                idx = (base + bb)[valid]
                weight = (spatial * wb)[valid]
                hist += np.bincount(idx, weights=weight, minlength=n)
    return hist.reshape(cells_y, cells_x, bins)


def hog(img, params=HogParams(), sample_id=""):
    """Compute the HOG descriptor of a GrayImage.

    Blocks are emitted row-major (top-left to bottom-right); inside a
    block, cells are row-major with their bin values contiguous. Each
    block is scaled by 1/sqrt(sum of squares + 1e-10).
    """
    dim = hog_dimension(img.width, img.height, params)
    hist = _cell_histograms(img.pixels, params)
    cells_y, cells_x = hist.shape[:2]
    bs, stride, bins = params.block_size, params.block_stride, params.bins
    blocks_y = (cells_y - bs) // stride + 1
    blocks_x = (cells_x - bs) // stride + 1
    out = np.empty((blocks_y, blocks_x, bs * bs * bins))
    for by in range(blocks_y):
        for bx in range(blocks_x):
            v = hist[by * stride:by * stride + bs, bx * stride:bx * stride + bs]
            v = v.ravel()
            out[by, bx] = v / np.sqrt(v @ v + NORM_EPS)
    values = out.ravel()
    assert values.size == dim
    return FeatureVector(sample_id, "hog", values)
