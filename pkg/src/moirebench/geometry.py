"""Projective geometry: 4-point homography estimation and image warping.

A homography is a plain 3x3 float64 matrix normalised so ``m[2][2] == 1``,
mapping source points to destination points in homogeneous pixel
coordinates (pixel centers at integer positions, x = column, y = row).
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateCornersError, ImageValueError
from .validation import check_homography, check_image

__all__ = [
    "homography_from_corners",
    "apply_homography",
    "warp_projective",
]


def homography_from_corners(src, dst) -> np.ndarray:
    """Solve the exact homography mapping four src points onto four dst points.

    Builds the standard 8x8 linear system (one pair of rows per
    correspondence, h22 pinned to 1) and solves it with a dense
    partially-pivoted solve.

    Parameters
    ----------
    src, dst : array_like
        Four (x, y) points each, shape (4, 2). No three src points may be
        collinear.

    Returns
    -------
    numpy.ndarray
        3x3 matrix with ``m[2][2] == 1`` mapping src -> dst.

    Raises
    ------
    DegenerateCornersError
        If the system is singular or the solution fails to reproduce the
        correspondences to within 1e-6 px.
    """
    s = np.asarray(src, dtype=np.float64)
    d = np.asarray(dst, dtype=np.float64)
    if s.shape != (4, 2) or d.shape != (4, 2):
        raise DegenerateCornersError(f"expected 4 (x, y) pairs, got {s.shape} and {d.shape}")

    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = s[i]
        u, v = d[i]
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        coeffs = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateCornersError(f"singular correspondence system: {exc}") from exc

    h = np.append(coeffs, 1.0).reshape(3, 3)
    if abs(np.linalg.det(h)) <= 1e-12:
        raise DegenerateCornersError("correspondences produce a singular homography")
    # Guard against an ill-conditioned (nearly singular) system that solved
    # without raising but does not actually map src onto dst.
    residual = float(np.max(np.abs(apply_homography(h, s) - d)))
    if not np.isfinite(residual) or residual > 1e-6:
        raise DegenerateCornersError(f"correspondence residual {residual:g} px exceeds 1e-6")
    return h


def apply_homography(h, points) -> np.ndarray:
    """Map (N, 2) points through a homography, returning (N, 2)."""
    h = np.asarray(h, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ones = np.ones((pts.shape[0], 1))
    hom = np.hstack([pts, ones]) @ h.T
    w = hom[:, 2]
    if np.any(np.abs(w) < 1e-12):
        raise ImageValueError("point maps to infinity under homography")
    return hom[:, :2] / w[:, None]


def warp_projective(img, h, out_size, interp: str = "bilinear") -> np.ndarray:
    """Warp an image by a homography using inverse sampling.

    Output pixel (x, y) takes the value of `img` at ``h^-1 (x, y)``.
    Sample points outside the source support ``[0, W-1] x [0, H-1]`` are
    filled with 0. Bilinear interpolation is the default; "nearest" rounds
    with floor(x + 0.5). The identity homography reproduces the input
    bit-exactly under either mode.

    Parameters
    ----------
    img : array_like
        Source image, (H, W) or (H, W, 3), float in [0, 1].
    h : array_like
        3x3 homography mapping source coords to output coords.
    out_size : int or (int, int)
        Output size in pixels, scalar for square or (width, height).
    interp : str
        "bilinear" or "nearest".
    """
    arr = check_image(img, name="img")
    h = check_homography(h)
    if interp not in ("bilinear", "nearest"):
        raise ImageValueError(f"unknown interpolation {interp!r}")
    if np.isscalar(out_size):
        out_w = out_h = int(out_size)
    else:
        out_w, out_h = (int(v) for v in out_size)
    if out_w < 1 or out_h < 1:
        raise ImageValueError(f"non-positive output size {out_w}x{out_h}")

    src_h, src_w = arr.shape[:2]
    hinv = np.linalg.inv(h)
    hinv = hinv / hinv[2, 2]

    xs = np.arange(out_w, dtype=np.float64)
    ys = np.arange(out_h, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = hinv[2, 0] * gx + hinv[2, 1] * gy + hinv[2, 2]
        sx = (hinv[0, 0] * gx + hinv[0, 1] * gy + hinv[0, 2]) / denom
        sy = (hinv[1, 0] * gx + hinv[1, 1] * gy + hinv[1, 2]) / denom
    # Samples behind the horizon (denom ~ 0) become non-finite; park them
    # outside the support so they take the zero fill.
    bad = ~(np.isfinite(sx) & np.isfinite(sy))
    if bad.any():
        sx = np.where(bad, -1.0, sx)
        sy = np.where(bad, -1.0, sy)

    inside = (sx >= 0.0) & (sx <= src_w - 1.0) & (sy >= 0.0) & (sy <= src_h - 1.0)
    planes = arr[:, :, None] if arr.ndim == 2 else arr

    if interp == "nearest":
        ix = np.clip(np.floor(sx + 0.5).astype(np.intp), 0, src_w - 1)
        iy = np.clip(np.floor(sy + 0.5).astype(np.intp), 0, src_h - 1)
        out = planes[iy, ix, :] * inside[:, :, None]
    else:
        x0 = np.clip(np.floor(sx).astype(np.intp), 0, src_w - 1)
        y0 = np.clip(np.floor(sy).astype(np.intp), 0, src_h - 1)
        x1 = np.minimum(x0 + 1, src_w - 1)
        y1 = np.minimum(y0 + 1, src_h - 1)
        fx = (sx - x0)[:, :, None]
        fy = (sy - y0)[:, :, None]
        v00 = planes[y0, x0, :]
        v10 = planes[y0, x1, :]
        v01 = planes[y1, x0, :]
        v11 = planes[y1, x1, :]
        top = v00 * (1.0 - fx) + v10 * fx
        bot = v01 * (1.0 - fx) + v11 * fx
        out = (top * (1.0 - fy) + bot * fy) * inside[:, :, None]

    out = np.clip(out, 0.0, 1.0)
    return out[:, :, 0] if arr.ndim == 2 else out
