"""2-d power spectral density and radial frequency bands.

The PSD of a pattern image is the squared magnitude of the centered 2-d
DFT after mean subtraction, so the DC bin is exactly zero and everything
else measures structured content. Radial coordinates are normalised per
axis: a bin at ``(fy, fx)`` has radius ``sqrt((fx/Nx)^2 + (fy/Ny)^2)``
with ``N = size/2`` the axis Nyquist, so radius 1.0 is the Nyquist circle
and corner bins reach ``sqrt(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImageValueError
from .validation import check_image

__all__ = ["PsdMap", "psd_2d", "radial_band_power"]


@dataclass(frozen=True)
class PsdMap:
    """Centered 2-d power spectrum with the DC bin location."""

    width: int
    height: int
    power: np.ndarray
    dc_index: tuple  # (row, col) of the DC bin in `power`

    def total_power(self) -> float:
        return float(self.power.sum())


def psd_2d(img) -> PsdMap:
    """Power spectral density of a single-channel image.

    The image mean is subtracted before the transform; the DC bin is
    forced to exactly 0.0 (it is analytically zero, this removes the
    last-ulp residue of the float sum). Parseval holds: the total power
    equals ``H * W *`` the sum of squared deviations from the mean.
    """
    arr = check_image(img, channels=1, name="pattern")
    centered = arr - arr.mean()
    spectrum = np.fft.fftshift(np.fft.fft2(centered))
    power = np.abs(spectrum) ** 2
    h, w = arr.shape
    dc = (h // 2, w // 2)
    power[dc] = 0.0
    return PsdMap(width=w, height=h, power=power, dc_index=dc)


def radial_band_power(psd: PsdMap, edges) -> np.ndarray:
    """Total power inside annular radial bands.

    Parameters
    ----------
    psd : PsdMap
    edges : sequence of float
        Strictly increasing interior band edges as fractions of the
        Nyquist radius; ``n`` edges give ``n + 1`` bands with half-open
        intervals ``[lo, hi)`` and the last band open-ended.

    Returns
    -------
    numpy.ndarray
        Band power sums, length ``len(edges) + 1``. The DC bin is
        excluded (it carries zero power by construction).
    """
    edges = [float(e) for e in edges]
    if len(edges) < 1 or any(e <= 0 for e in edges) or any(
        b <= a for a, b in zip(edges, edges[1:])
    ):
        raise ImageValueError(f"band edges must be positive and increasing, got {edges}")

    h, w = psd.power.shape
    fy = (np.arange(h) - psd.dc_index[0]) / (h / 2.0)
    fx = (np.arange(w) - psd.dc_index[1]) / (w / 2.0)
    radius = np.sqrt(fx[None, :] ** 2 + fy[:, None] ** 2)

    bounds = [0.0] + edges + [np.inf]
    out = np.empty(len(bounds) - 1)
    for i, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        mask = (radius >= lo) & (radius < hi)
        out[i] = psd.power[mask].sum()
    return out
