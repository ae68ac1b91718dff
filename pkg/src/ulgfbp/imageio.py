"""PNG / JPEG decoding and 8-bit PNG export (Pillow backed)."""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IngestionError
from .imaging import to_grayscale


def read_gray(path):
    """Decode an image file to an 8-bit grayscale array."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return np.asarray(im, dtype=np.uint8).copy()
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                # 16-bit scans: keep the top byte
                data = np.asarray(im, dtype=np.int64)
                return np.clip(data >> 8 if data.max() > 255 else data, 0, 255).astype(np.uint8)
            if mode == "LA":
                return np.asarray(im.getchannel("L"), dtype=np.uint8).copy()
            rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise IngestionError(f"cannot decode image ({exc})", path) from exc
    return to_grayscale(rgb)


def write_png(path, array):
    """Write a uint8 ``(h, w)`` or ``(h, w, 3)`` array as PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    Image.fromarray(arr).save(path, format="PNG")


def to_uint8(values, lo=0.0, hi=1.0):
    """Scale ``[lo, hi]`` to 0..255, rounding half up."""
    scaled = (np.asarray(values, dtype=np.float64) - lo) / (hi - lo) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def minmax_uint8(values):
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-300:
        return np.zeros(values.shape, dtype=np.uint8)
    return to_uint8(values, lo, hi)
