"""Independent reference implementations used as test oracles.

Everything here is written the slow, obvious way (explicit loops, no
shared code with the package) so a test comparing package output against
these functions is a genuine cross-check, not a tautology.
"""

import math

import numpy as np


def conv_reflect_2d(plane, kernel):
    """Direct O(n^2 k^2) cross-correlation with edge-repeating reflection.

    np.pad calls this convention "symmetric"; scipy.ndimage calls the
    same thing "reflect". The package follows the scipy naming.
    """
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(plane, ((ph, ph), (pw, pw)), mode="symmetric")
    out = np.zeros_like(plane, dtype=float)
    h, w = plane.shape
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(kh):
                for dx in range(kw):
                    acc += padded[y + dy, x + dx] * kernel[dy, dx]
            out[y, x] = acc
    return out


def gaussian_kernel_2d(size, sigma):
    half = size // 2
    k1 = np.array([math.exp(-(i - half) ** 2 / (2 * sigma**2)) for i in range(size)])
    k1 /= k1.sum()
    return np.outer(k1, k1)


def invert_3x3(m):
    """Adjugate inverse, no numpy.linalg."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    adj = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return np.array(adj, dtype=float) / det


def bilinear_sample(plane, x, y):
    """Sample with zero fill outside [0, W-1] x [0, H-1]."""
    h, w = plane.shape
    if x < 0 or y < 0 or x > w - 1 or y > h - 1:
        return 0.0
    x0, y0 = int(math.floor(x)), int(math.floor(y))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    top = plane[y0, x0] * (1 - fx) + plane[y0, x1] * fx
    bot = plane[y1, x0] * (1 - fx) + plane[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def warp_reference(plane, hmat, out_w, out_h):
    """Inverse-map projective warp of a single plane, pixel by pixel."""
    hinv = invert_3x3(np.asarray(hmat, dtype=float))
    out = np.zeros((out_h, out_w))
    for y in range(out_h):
        for x in range(out_w):
            sx, sy, sw = hinv @ np.array([x, y, 1.0])
            if abs(sw) < 1e-12:
                continue
            out[y, x] = bilinear_sample(plane, sx / sw, sy / sw)
    return out


def subpixel_mosaic_reference(img):
    """3x3 cell per source pixel: dark top row, then two RGB rows."""
    h, w, _ = img.shape
    out = np.zeros((3 * h, 3 * w, 3))
    for y in range(h):
        for x in range(w):
            for c in range(3):
                out[3 * y + 1, 3 * x + c, c] = img[y, x, c]
                out[3 * y + 2, 3 * x + c, c] = img[y, x, c]
    return out


def bayer_sites_reference(h, w, phase):
    """Channel index per sensor site for a 2x2 CFA tile string."""
    tile = {
        "RGGB": [[0, 1], [1, 2]],
        "BGGR": [[2, 1], [1, 0]],
        "GRBG": [[1, 0], [2, 1]],
        "GBRG": [[1, 2], [0, 1]],
    }[phase]
    sites = np.zeros((h, w), dtype=int)
    for y in range(h):
        for x in range(w):
            sites[y, x] = tile[y % 2][x % 2]
    return sites


def ncc_reference(a, b):
    """Zero-mean normalized cross-correlation of two planes."""
    x = a.astype(float) - a.mean()
    y = b.astype(float) - b.mean()
    return float((x * y).sum() / math.sqrt((x * x).sum() * (y * y).sum()))


def luminance_reference(img):
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def psnr_reference(a, b):
    diff = a.astype(float) - b.astype(float)
    mse = float((diff * diff).mean())
    if mse == 0.0:
        return 100.0
    return 10.0 * math.log10(255.0**2 / mse)


def ssim_constant_reference(mu1, mu2):
    """SSIM of two constant u8 images: only the luminance term is active."""
    c1 = (0.01 * 255.0) ** 2
    return (2.0 * mu1 * mu2 + c1) / (mu1 * mu1 + mu2 * mu2 + c1)


def grating(size, cycles, axis=0):
    """Horizontal or vertical cosine grating with `cycles` periods."""
    t = np.arange(size) * (2.0 * np.pi * cycles / size)
    wave = 0.5 + 0.4 * np.cos(t)
    plane = np.tile(wave, (size, 1)) if axis == 0 else np.tile(wave[:, None], (1, size))
    return plane


def dominant_radius_reference(pattern):
    """Normalized radius of the strongest non-DC spectral bin.

    Frequencies are normalized per axis so the Nyquist circle has radius
    1; this mirrors the documented band geometry but is computed straight
    from numpy's fft frequencies rather than through the package.
    """
    p = pattern - pattern.mean()
    spec = np.abs(np.fft.fft2(p)) ** 2
    spec[0, 0] = 0.0
    h, w = pattern.shape
    fy = np.fft.fftfreq(h)  # cycles per pixel, in [-0.5, 0.5)
    fx = np.fft.fftfreq(w)
    iy, ix = np.unravel_index(np.argmax(spec), spec.shape)
    ry = fy[iy] / 0.5
    rx = fx[ix] / 0.5
    return math.hypot(rx, ry)
