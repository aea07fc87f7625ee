"""Input validation helpers.

Images are plain numpy arrays: float64 in [0, 1] for working rasters
(shape ``(H, W)`` for single channel, ``(H, W, 3)`` for RGB) and uint8 for
storage rasters. These helpers normalise and check those contracts at
public entry points; internal stages assume validated input.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import ImageValueError

__all__ = [
    "check_image",
    "check_u8_image",
    "check_homography",
    "check_rng",
    "clamp01",
]


def check_image(img, *, channels=None, name="image"):
    """Validate a float image and return it as a float64 array.

    Parameters
    ----------
    img : array_like
        Image data, ``(H, W)`` or ``(H, W, 3)``.
    channels : int or None
        Require exactly this channel count (1 means a 2-d array).
    name : str
        Label used in error messages.

    Returns
    -------
    numpy.ndarray
        float64 view or copy of `img`.
    """
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        raise ImageValueError(f"{name}: expected float data in [0, 1], got uint8")
    arr = arr.astype(np.float64, copy=False)
    if arr.ndim == 2:
        nch = 1
    elif arr.ndim == 3 and arr.shape[2] in (1, 3):
        nch = arr.shape[2]
        if nch == 1:
            arr = arr[:, :, 0]
    else:
        raise ImageValueError(f"{name}: expected (H, W) or (H, W, 3), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageValueError(f"{name}: empty image {arr.shape}")
    if channels is not None and nch != channels:
        raise ImageValueError(f"{name}: expected {channels} channel(s), got {nch}")
    if not np.all(np.isfinite(arr)):
        raise ImageValueError(f"{name}: contains non-finite values")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < 0.0 or hi > 1.0:
        raise ImageValueError(f"{name}: values outside [0, 1] (min {lo:g}, max {hi:g})")
    return arr


def check_u8_image(img, *, channels=None, name="image"):
    """Validate a uint8 image, returning it unchanged."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ImageValueError(f"{name}: expected uint8, got {arr.dtype}")
    if arr.ndim == 2:
        nch = 1
    elif arr.ndim == 3 and arr.shape[2] in (1, 3):
        nch = arr.shape[2]
    else:
        raise ImageValueError(f"{name}: expected (H, W) or (H, W, 3), got shape {arr.shape}")
    if channels is not None and nch != channels:
        raise ImageValueError(f"{name}: expected {channels} channel(s), got {nch}")
    return arr


def check_homography(h, *, name="homography"):
    """Validate a 3x3 projective matrix: normalised, finite, invertible."""
    arr = np.asarray(h, dtype=np.float64)
    if arr.shape != (3, 3):
        raise ImageValueError(f"{name}: expected 3x3 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageValueError(f"{name}: contains non-finite values")
    if abs(arr[2, 2] - 1.0) > 1e-9:
        raise ImageValueError(f"{name}: not normalised (m[2][2] = {arr[2, 2]!r})")
    if abs(np.linalg.det(arr)) <= 1e-12:
        raise ImageValueError(f"{name}: singular matrix")
    return arr


def check_rng(rng):
    """Coerce an int seed or Generator into a numpy Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, numbers.Integral):
        return np.random.Generator(np.random.PCG64(int(rng)))
    raise TypeError(f"expected int seed or numpy Generator, got {type(rng).__name__}")


def clamp01(arr):
    """Clamp float data into [0, 1] in place-safe fashion."""
    return np.clip(arr, 0.0, 1.0)
