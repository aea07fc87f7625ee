"""Raster conversions and exact crops.

Working images are float64 in [0, 1]; storage images are uint8. The
quantisation rule is ``round(v * 255)``, which makes uint8 -> float ->
uint8 lossless.
"""

from __future__ import annotations

import numpy as np

from .errors import CropRegionError
from .validation import check_image, check_u8_image

__all__ = ["to_uint8", "from_uint8", "luminance", "crop"]

# Rec. 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])


def to_uint8(img) -> np.ndarray:
    """Quantise a float image to uint8 with round-half-away behaviour."""
    arr = check_image(img, name="img")
    return (np.floor(arr * 255.0 + 0.5)).astype(np.uint8)


def from_uint8(img) -> np.ndarray:
    """Promote a uint8 image to float64 in [0, 1]."""
    arr = check_u8_image(img, name="img")
    out = arr.astype(np.float64) / 255.0
    if out.ndim == 3 and out.shape[2] == 1:
        out = out[:, :, 0]
    return out


def luminance(img) -> np.ndarray:
    """Rec. 601 luminance of an RGB image; single-channel passes through."""
    arr = check_image(img, name="img")
    if arr.ndim == 2:
        return arr
    return arr @ _LUMA


def crop(img, x: int, y: int, width: int, height: int) -> np.ndarray:
    """Copy the axis-aligned rectangle at (x, y) of the given size.

    The rectangle must lie fully inside the image; anything else raises
    :class:`CropRegionError` rather than silently clipping.
    """
    arr = np.asarray(img)
    if arr.ndim not in (2, 3):
        raise CropRegionError(f"crop: expected 2-d or 3-d array, got shape {arr.shape}")
    h, w = arr.shape[:2]
    x, y, width, height = int(x), int(y), int(width), int(height)
    if width < 1 or height < 1:
        raise CropRegionError(f"crop: non-positive size {width}x{height}")
    if x < 0 or y < 0 or x + width > w or y + height > h:
        raise CropRegionError(
            f"crop: rectangle ({x},{y},{width},{height}) exceeds image {w}x{h}"
        )
    return arr[y : y + height, x : x + width].copy()
