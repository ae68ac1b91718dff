"""Uniform local binary patterns.

A pattern is an ``SP``-bit integer.  Bit ``ep`` (``ep = 0`` is the most
significant bit) is 1 when the neighbour ``ep`` is >= the centre value;
neighbours are read clockwise starting from the top one.

Two labelings are provided:

* ``u2``: every uniform pattern (at most two circular 0/1 transitions) gets
  its own label, ranked by numeric value; all others share the last label.
  For SP = 8 that is 58 + 1 = 59 labels.
* ``riu2``: rotation invariant; uniform patterns map to their number of
  set bits, the rest to ``SP + 1`` (SP + 2 labels).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DimensionError

MODES = ("u2", "riu2")


@dataclass(frozen=True)
class LbpConfig:
    radius: int = 1

    def __post_init__(self):
        if self.radius not in (1, 2):
            # the tables are 2**SP entries long; SP = 24 would need 16M
            raise ValueError(f"LBP radius must be 1 or 2, got {self.radius}")

    @property
    def sampling_points(self):
        return 4 * (2 * self.radius)


@dataclass(frozen=True)
class UlbpTables:
    sampling_points: int
    uniformity: np.ndarray
    u2_label: np.ndarray
    riu2_label: np.ndarray

    @property
    def n_uniform(self):
        return int(np.count_nonzero(self.uniformity <= 2))

    def n_bins(self, mode):
        if mode == "u2":
            return self.n_uniform + 1
        if mode == "riu2":
            return self.sampling_points + 2
        raise ValueError(f"unknown mode {mode!r}")

    def labels(self, mode):
        if mode == "u2":
            return self.u2_label
        if mode == "riu2":
            return self.riu2_label
        raise ValueError(f"unknown mode {mode!r}")


def _popcount(values, sp):
    values = np.asarray(values, dtype=np.int64)
    out = np.zeros_like(values)
    for i in range(sp):
        out += (values >> i) & 1
    return out


def _circular_transitions(values, sp):
    values = np.asarray(values, dtype=np.int64)
    mask = (1 << sp) - 1
    rotated = ((values >> 1) | ((values & 1) << (sp - 1))) & mask
    return _popcount(values ^ rotated, sp)


def build_tables(sampling_points=8):
    sp = int(sampling_points)
    patterns = np.arange(1 << sp, dtype=np.int64)
    u = _circular_transitions(patterns, sp)
    uniform = u <= 2
    n_uniform = int(np.count_nonzero(uniform))
    u2 = np.full(patterns.shape, n_uniform, dtype=np.int64)
    # patterns ascend, so cumulative counting ranks uniform ones by value
    u2[uniform] = np.arange(n_uniform)
    riu2 = np.where(uniform, _popcount(patterns, sp), sp + 1)
    for arr in (u, u2, riu2):
        arr.setflags(write=False)
    return UlbpTables(sp, u, u2, riu2)


@lru_cache(maxsize=None)
def get_tables(sampling_points=8):
    return build_tables(sampling_points)


def lbp_pattern(img, x, y, cfg=LbpConfig()):
    """Pattern at column ``x``, row ``y``."""
    img = np.asarray(img, dtype=np.float64)
    r = cfg.radius
    h, w = img.shape
    if not (r <= x < w - r and r <= y < h - r):
        raise IndexError(f"pixel ({x}, {y}) is closer than {r} to the border of a {w}x{h} image")
    centre = img[y, x]
    code = 0
    for dy, dx in kernels.ring_offsets(r):
        code = (code << 1) | int(img[y + dy, x + dx] - centre >= 0)
    return code


def uniformity(pattern, sampling_points=8):
    return int(_circular_transitions(pattern, sampling_points))


def is_uniform(pattern, sampling_points=8):
    return uniformity(pattern, sampling_points) <= 2


def u2_label(pattern, sampling_points=8):
    return int(get_tables(sampling_points).u2_label[pattern])


def riu2_label(pattern, sampling_points=8):
    return int(get_tables(sampling_points).riu2_label[pattern])


def code_image(img, cfg=LbpConfig(), mode="u2", tables=None):
    """Label image of the interior pixels (a border of ``R`` is dropped)."""
    img = np.asarray(img, dtype=np.float64)
    r = cfg.radius
    if img.ndim != 2 or img.shape[0] <= 2 * r or img.shape[1] <= 2 * r:
        raise DimensionError(f"image of shape {img.shape} too small for LBP radius {r}")
    if tables is None:
        tables = get_tables(cfg.sampling_points)
    codes = kernels.lbp_codes(img, r)
    return tables.labels(mode)[codes]


def region_histograms(labels, n_bins=59, grid=3, normalize=True):
    """L1-normalized label histograms over a ``grid x grid`` partition.

    Returns an ``(grid * grid, n_bins)`` array, regions row-major.  When the
    size does not divide evenly the earlier rows/columns get the extra pixel.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.shape[0] < grid or labels.shape[1] < grid:
        raise DimensionError(f"label image of shape {labels.shape} smaller than {grid}x{grid} grid")
    if labels.size and (labels.min() < 0 or labels.max() >= n_bins):
        raise ValueError(f"labels must lie in [0, {n_bins - 1}]")
    out = np.zeros((grid * grid, n_bins), dtype=np.float64)
    row_blocks = np.array_split(np.arange(labels.shape[0]), grid)
    col_blocks = np.array_split(np.arange(labels.shape[1]), grid)
    for i, rows in enumerate(row_blocks):
        for j, cols in enumerate(col_blocks):
            block = labels[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
            counts = np.bincount(block.ravel(), minlength=n_bins).astype(np.float64)
            total = counts.sum()
            if not normalize:
                out[i * grid + j] = counts
            elif total > 0:
                out[i * grid + j] = counts / total
    return out
