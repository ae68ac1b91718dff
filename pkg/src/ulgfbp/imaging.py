"""Preprocessing primitives: grayscale, resize, equalization, z-score.

Images are plain 2-D numpy arrays indexed ``[row, column]``; 8-bit images
are ``uint8`` and real-valued ones ``float64``.
"""

import numpy as np

from .errors import DimensionError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _round_half_up(values):
    return np.floor(values + 0.5)


def to_grayscale(rgb):
    """Rec. 601 luma of an 8-bit RGB image.

    ``rgb`` is either an ``(h, w, 3)`` array or a sequence of three
    ``(h, w)`` channel arrays.
    """
    if isinstance(rgb, np.ndarray) and rgb.ndim == 3:
        if rgb.shape[2] < 3:
            raise DimensionError(f"expected 3 channels, got shape {rgb.shape}")
        channels = [rgb[..., i] for i in range(3)]
    else:
        channels = [np.asarray(c) for c in rgb]
        if len(channels) != 3:
            raise DimensionError(f"expected 3 channels, got {len(channels)}")
        shapes = {c.shape for c in channels}
        if len(shapes) != 1 or channels[0].ndim != 2:
            raise DimensionError(f"channel dimensions differ: {sorted(shapes)}")
    r, g, b = (c.astype(np.float64) for c in channels)
    luma = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(_round_half_up(luma), 0, 255).astype(np.uint8)


def _bilinear_coords(n_in, n_out):
    # pixel-centre alignment, clamped at the edges
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize_float(img, width, height):
    """Bilinear resize of a real-valued 2-D array (or ``(h, w, c)`` stack)."""
    if width < 1 or height < 1:
        raise ValueError(f"target size must be >= 1x1, got {width}x{height}")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    if (w, h) == (width, height):
        return img.copy()
    y0, y1, fy = _bilinear_coords(h, height)
    x0, x1, fx = _bilinear_coords(w, width)
    if img.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy) + bottom * fy


def resize_bilinear(img, width, height):
    """Resize an 8-bit image to ``width x height``, rounding half up."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise DimensionError(f"expected a 2-D image, got shape {img.shape}")
    out = resize_float(img, width, height)
    return np.clip(_round_half_up(out), 0, 255).astype(np.uint8)


def equalize_histogram(img):
    """Map each level ``v`` to ``floor(255 * cdf(v))``.

    No cdf-min renormalization, so a constant image goes to 255.
    """
    img = np.asarray(img, dtype=np.uint8)
    if img.size == 0:
        raise DimensionError("cannot equalize an empty image")
    counts = np.bincount(img.ravel(), minlength=256).astype(np.int64)
    cdf = np.cumsum(counts)
    lut = (255 * cdf) // img.size
    return lut.astype(np.uint8)[img]


def normalize_zscore(img, eps=1e-12):
    """Zero mean, unit population std; constant images become all zeros."""
    data = np.asarray(img, dtype=np.float64)
    if data.size == 0:
        raise DimensionError("cannot normalize an empty image")
    std = data.std()
    if std < eps:
        return np.zeros_like(data)
    return (data - data.mean()) / std


def preprocess(img, width, height):
    """grayscale -> resize -> equalize -> normalize for an 8-bit gray image."""
    img = np.asarray(img)
    if img.ndim == 3:
        img = to_grayscale(img)
    return normalize_zscore(equalize_histogram(resize_bilinear(img, width, height)))
