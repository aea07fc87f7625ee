"""PNG file I/O via Pillow.

Datasets are stored as PNGs: RGB for clean/moire images, 8-bit grayscale
for pattern images. Writes are deterministic (no timestamps, fixed
compression settings) so rebuilt datasets compare byte-identical.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import ImageValueError
from .raster import from_uint8, to_uint8
from .validation import check_u8_image

__all__ = ["read_image", "read_image_u8", "write_png"]


def read_image_u8(path) -> np.ndarray:
    """Read an image file as uint8, grayscale kept 2-d, color as RGB."""
    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        if im.mode not in ("RGB", "RGBA", "LA", "P", "I;16", "I", "1"):
            raise ImageValueError(f"{path}: unsupported image mode {im.mode}")
        if im.mode != "RGB" and im.mode != "L":
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8)


def read_image(path) -> np.ndarray:
    """Read an image file as float64 in [0, 1]."""
    return from_uint8(read_image_u8(path))


def write_png(path, img) -> None:
    """Write a float or uint8 image as PNG (grayscale for 2-d input)."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        arr = to_uint8(arr)
    arr = check_u8_image(arr, name=str(path))
    mode = "L" if arr.ndim == 2 else "RGB"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    Image.fromarray(arr, mode=mode).save(path, format="PNG", compress_level=6)
