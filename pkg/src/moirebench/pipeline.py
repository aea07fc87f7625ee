"""Screen-photography degradation pipeline.

Simulates photographing an image shown on an LCD panel with a digital
camera, producing aligned (clean, degraded) training pairs plus a
pattern-only image that isolates the interference signature:

1. subpixel mosaic: each source pixel becomes a 3x3 panel cell (one dark
   mask row, two RGB stripe rows) at 3x resolution;
2. random projective jitter of the panel canvas (hand-held camera pose)
   with a small Gaussian optical blur;
3. color-filter-array capture: stride-3 decimation onto the sensor grid,
   a Bayer mosaic, and additive Gaussian sensor noise;
4. a simple camera ISP: bilinear demosaic and edge-preserving denoise;
5. JPEG round trip, inversion of the known geometry, and an aligned crop.

The pattern-only image runs a pure white frame through the identical
degradation (same jitter, same noise field); its luminance shows nothing
but the interference pattern.

All steps are deterministic functions of (source, config, seed). Random
draws come from two tagged PCG64 streams: "geometry" (two uniforms per
canvas corner, order TL, TR, BR, BL, re-drawn wholesale on a degenerate
sample) and "noise" (one standard-normal field the size of the sensor).
"""

from __future__ import annotations

import hashlib
import io as _io
import json
import numbers
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from PIL import Image
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import CropRegionError, DegenerateCornersError, ImageValueError
from .filters import add_gaussian_noise, bilateral_denoise, gaussian_filter
from .geometry import apply_homography, homography_from_corners, warp_projective
from .raster import crop, from_uint8, luminance, to_uint8
from .seeding import GEOMETRY_STREAM, NOISE_STREAM, derive_seed, rng_from
from .validation import check_homography, check_image, check_rng

__all__ = [
    "PipelineConfig",
    "RawImage",
    "MoirePair",
    "BAYER_PHASES",
    "lcd_subpixel_mosaic",
    "sample_projective_transform",
    "bayer_mosaic",
    "demosaic_bilinear",
    "jpeg_roundtrip",
    "align_and_crop",
    "crop_placement",
    "generate_pair",
    "MoireSynthesizer",
]

# 2x2 CFA tiles as channel indices (R=0, G=1, B=2).
BAYER_PHASES = {
    "RGGB": ((0, 1), (1, 2)),
    "BGGR": ((2, 1), (1, 0)),
    "GRBG": ((1, 0), (2, 1)),
    "GBRG": ((1, 2), (0, 1)),
}

# Panel cell is 3x per source pixel; sensor samples cell centers.
_CELL = 3
_CELL_OFFSET = 1


@dataclass(frozen=True)
class PipelineConfig:
    """Degradation parameters. Defaults give the stock benchmark look.

    corner_radius_ratio : jitter disc radius as a fraction of the panel
        canvas size, in (0, 0.5).
    blur_sigma : sigma of the 3x3 optical blur, > 0.
    noise_sigma : sensor noise sigma in [0, 1] intensity units, >= 0.
    jpeg_quality : JPEG round-trip quality, 1..100.
    denoise_strength : ISP denoiser strength, >= 0 (0 disables).
    output_size : side of the final square crops, >= 64.
    cfa_phase : Bayer tile, one of RGGB, BGGR, GRBG, GBRG.
    blur_before_warp : apply the optical blur to the panel before the
        projective resample instead of after it.
    seed : default master seed when no explicit seed is passed.
    """

    corner_radius_ratio: float = 0.2
    blur_sigma: float = 1.5
    noise_sigma: float = 0.01
    jpeg_quality: int = 85
    denoise_strength: float = 0.5
    output_size: int = 1024
    cfa_phase: str = "RGGB"
    blur_before_warp: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.corner_radius_ratio < 0.5:
            raise ImageValueError(
                f"corner_radius_ratio must be in (0, 0.5), got {self.corner_radius_ratio}"
            )
        if self.blur_sigma <= 0.0:
            raise ImageValueError(f"blur_sigma must be > 0, got {self.blur_sigma}")
        if self.noise_sigma < 0.0:
            raise ImageValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 1 <= int(self.jpeg_quality) <= 100:
            raise ImageValueError(f"jpeg_quality must be 1..100, got {self.jpeg_quality}")
        if self.denoise_strength < 0.0:
            raise ImageValueError(
                f"denoise_strength must be >= 0, got {self.denoise_strength}"
            )
        if int(self.output_size) < 64:
            raise ImageValueError(f"output_size must be >= 64, got {self.output_size}")
        if self.cfa_phase not in BAYER_PHASES:
            raise ImageValueError(
                f"cfa_phase must be one of {sorted(BAYER_PHASES)}, got {self.cfa_phase!r}"
            )

    def digest(self) -> str:
        """Hash of the degradation semantics (seed excluded)."""
        payload = asdict(self)
        payload.pop("seed")
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RawImage:
    """Single-channel CFA sensor readout plus its Bayer phase."""

    data: np.ndarray
    phase: str = "RGGB"

    def __post_init__(self):
        if self.phase not in BAYER_PHASES:
            raise ImageValueError(f"unknown Bayer phase {self.phase!r}")
        h, w = self.data.shape[:2]
        if self.data.ndim != 2 or h % 2 or w % 2:
            raise ImageValueError(
                f"raw data must be 2-d with even sides, got shape {self.data.shape}"
            )


@dataclass
class MoirePair:
    """Aligned benchmark triple: clean crop, degraded crop, pattern."""

    clean: np.ndarray
    moire: np.ndarray
    pattern: np.ndarray
    meta: dict = field(default_factory=dict)


def lcd_subpixel_mosaic(img) -> np.ndarray:
    """Expand each RGB pixel into a 3x3 panel cell at 3x resolution.

    Cell layout per pixel (rows top to bottom): a dark mask row, then two
    identical RGB stripe rows, so each channel lights 2 of the 9 cell
    sites and the per-channel mean drops to exactly 2/9 of the input's.
    """
    arr = check_image(img, channels=3, name="img")
    h, w = arr.shape[:2]
    out = np.zeros((3 * h, 3 * w, 3), dtype=np.float64)
    for c in range(3):
        out[1::3, c::3, c] = arr[:, :, c]
        out[2::3, c::3, c] = arr[:, :, c]
    return out


def sample_projective_transform(rng, canvas_size, radius_ratio: float = 0.2) -> np.ndarray:
    """Draw a random homography jittering the canvas corners.

    Each corner of the canvas moves by an offset drawn uniformly from a
    disc of radius ``radius_ratio * min(canvas side)``; the returned
    homography maps original corners onto the jittered ones. Draw order:
    for each corner TL, TR, BR, BL, one uniform for the radial coordinate
    then one for the angle. Degenerate draws (measure zero) are re-drawn,
    up to 16 attempts.
    """
    rng = check_rng(rng)
    if not 0.0 < radius_ratio < 0.5:
        raise ImageValueError(f"radius_ratio must be in (0, 0.5), got {radius_ratio}")
    if np.isscalar(canvas_size):
        w = h = int(canvas_size)
    else:
        w, h = (int(v) for v in canvas_size)
    if w < 2 or h < 2:
        raise ImageValueError(f"canvas must be at least 2x2, got {w}x{h}")

    corners = np.array(
        [[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, h - 1.0], [0.0, h - 1.0]]
    )
    radius = radius_ratio * min(w, h)
    last_err = None
    for _ in range(16):
        offsets = np.empty((4, 2))
        for i in range(4):
            r = radius * np.sqrt(rng.uniform())
            theta = 2.0 * np.pi * rng.uniform()
            offsets[i] = (r * np.cos(theta), r * np.sin(theta))
        try:
            return homography_from_corners(corners, corners + offsets)
        except DegenerateCornersError as exc:
            last_err = exc
    raise DegenerateCornersError(f"no valid transform after 16 attempts: {last_err}")


def bayer_mosaic(img, phase: str = "RGGB") -> RawImage:
    """Sample one color channel per pixel following a Bayer tile."""
    arr = check_image(img, channels=3, name="img")
    if phase not in BAYER_PHASES:
        raise ImageValueError(f"unknown Bayer phase {phase!r}")
    h, w = arr.shape[:2]
    if h % 2 or w % 2:
        raise ImageValueError(f"Bayer capture needs even dimensions, got {w}x{h}")
    tile = BAYER_PHASES[phase]
    raw = np.empty((h, w), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            raw[dy::2, dx::2] = arr[dy::2, dx::2, tile[dy][dx]]
    return RawImage(data=raw, phase=phase)


_KERNEL_G = np.array([[0.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 0.0]])
_KERNEL_RB = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]])


def demosaic_bilinear(raw: RawImage) -> np.ndarray:
    """Bilinear CFA interpolation (2- or 4-neighbor averages, reflect border).

    Implemented as mask-normalised convolution, which reproduces the
    classic per-site stencils exactly and keeps constant inputs constant
    out to the borders.
    """
    data = check_image(raw.data, channels=1, name="raw")
    tile = BAYER_PHASES[raw.phase]
    h, w = data.shape
    yy, xx = np.mgrid[0:h, 0:w]
    site = np.array(tile)[yy % 2, xx % 2]

    out = np.empty((h, w, 3), dtype=np.float64)
    for c in range(3):
        mask = (site == c).astype(np.float64)
        kernel = _KERNEL_G if c == 1 else _KERNEL_RB
        num = ndimage.correlate(data * mask, kernel, mode="reflect")
        den = ndimage.correlate(mask, kernel, mode="reflect")
        out[:, :, c] = num / den
    return np.clip(out, 0.0, 1.0)


def jpeg_roundtrip(img, quality: int) -> np.ndarray:
    """Encode to baseline JPEG at the given quality and decode back."""
    arr = check_image(img, name="img")
    quality = int(quality)
    if not 1 <= quality <= 100:
        raise ImageValueError(f"quality must be 1..100, got {quality}")
    u8 = to_uint8(arr)
    mode = "L" if u8.ndim == 2 else "RGB"
    buf = _io.BytesIO()
    Image.fromarray(u8, mode=mode).save(buf, format="JPEG", quality=quality)
    buf.seek(0)
    with Image.open(buf) as im:
        decoded = np.asarray(im.convert(mode), dtype=np.uint8)
    return from_uint8(decoded)


def _source_to_camera(h: np.ndarray) -> np.ndarray:
    """Compose panel scale, jitter, and sensor decimation into one map.

    Source pixel u lands on panel coordinate 3u + 1 (its cell center),
    moves under the jitter homography h, and is read by the sensor at
    camera coordinate (p - 1) / 3.
    """
    s3 = np.array([[3.0, 0.0, _CELL_OFFSET], [0.0, 3.0, _CELL_OFFSET], [0.0, 0.0, 1.0]])
    a = np.linalg.inv(s3) @ h @ s3
    return a / a[2, 2]


def crop_placement(h, src_size, out_size: int) -> tuple:
    """Integer crop origin for the aligned pair, or raise CropRegionError.

    The aligned image is valid where the composed source-to-camera map
    lands inside the sensor frame; the crop of side `out_size` is placed
    at the centroid of all feasible placements (the plain center crop
    when `h` is the identity). Infeasible geometry raises.

    Parameters
    ----------
    h : array_like
        Jitter homography on the panel canvas.
    src_size : (int, int)
        Source (width, height).
    out_size : int
        Side of the square crop.
    """
    w, hgt = (int(v) for v in src_size)
    k = int(out_size)
    if k > w or k > hgt:
        raise CropRegionError(f"crop {k} exceeds source {w}x{hgt}")
    a = _source_to_camera(check_homography(h))

    # Valid region in source coords: preimage of the sensor frame.
    frame = np.array(
        [[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, hgt - 1.0], [0.0, hgt - 1.0]]
    )
    quad = apply_homography(np.linalg.inv(a) / np.linalg.inv(a)[2, 2], frame)

    # Half-plane form of the quad (counter-clockwise in image coords).
    if _polygon_area(quad) < 0:
        quad = quad[::-1]
    # Feasible origins: the [0, w-k] x [0, hgt-k] box cut by each edge
    # constraint, tightened so all four crop corners satisfy it.
    poly = [
        np.array([0.0, 0.0]),
        np.array([w - float(k), 0.0]),
        np.array([w - float(k), hgt - float(k)]),
        np.array([0.0, hgt - float(k)]),
    ]
    span = float(k - 1)
    for i in range(4):
        p, q = quad[i], quad[(i + 1) % 4]
        edge = q - p
        normal = np.array([edge[1], -edge[0]])  # inside: normal . (x - p) <= 0
        slack = max(normal[0], 0.0) * span + max(normal[1], 0.0) * span
        poly = _clip_halfplane(poly, normal, float(normal @ p) - slack)
        if not poly:
            raise CropRegionError(
                f"no {k}x{k} crop fits the valid region for source {w}x{hgt}; "
                "use larger sources or a smaller output_size"
            )
    ox, oy = _polygon_centroid(poly)
    origin = (int(round(ox)), int(round(oy)))
    # The centroid of a non-empty feasible polygon is feasible; rounding
    # can spill over only when the polygon is under a pixel wide.
    corners = origin + np.array([[0, 0], [span, 0], [span, span], [0, span]], dtype=float)
    mapped = apply_homography(a, corners)
    eps = 1e-7
    if (
        origin[0] < 0
        or origin[1] < 0
        or origin[0] + k > w
        or origin[1] + k > hgt
        or np.any(mapped[:, 0] < -eps)
        or np.any(mapped[:, 1] < -eps)
        or np.any(mapped[:, 0] > w - 1 + eps)
        or np.any(mapped[:, 1] > hgt - 1 + eps)
    ):
        raise CropRegionError(
            f"valid region thinner than one pixel for {k}x{k} crop in source {w}x{hgt}"
        )
    return origin


def _polygon_area(pts) -> float:
    pts = np.asarray(pts)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_centroid(poly) -> tuple:
    pts = np.asarray(poly)
    if len(pts) == 1:
        return float(pts[0, 0]), float(pts[0, 1])
    if len(pts) == 2:
        mid = pts.mean(axis=0)
        return float(mid[0]), float(mid[1])
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) < 1e-12:
        mid = pts.mean(axis=0)
        return float(mid[0]), float(mid[1])
    cx = float(((x + xn) * cross).sum() / (6.0 * area))
    cy = float(((y + yn) * cross).sum() / (6.0 * area))
    return cx, cy


def _clip_halfplane(poly, normal, limit) -> list:
    """Sutherland-Hodgman clip of a polygon by normal . x <= limit."""
    if not poly:
        return []
    out = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        c_in = float(normal @ cur) <= limit + 1e-9
        n_in = float(normal @ nxt) <= limit + 1e-9
        if c_in:
            out.append(cur)
        if c_in != n_in:
            d = nxt - cur
            denom = float(normal @ d)
            if abs(denom) > 1e-12:
                t = (limit - float(normal @ cur)) / denom
                out.append(cur + np.clip(t, 0.0, 1.0) * d)
    return out


def align_and_crop(clean, degraded, h, out_size: int):
    """Invert the known capture geometry and crop an aligned pair.

    `degraded` is the sensor-resolution output of the capture chain under
    jitter `h`; the inverse of the composed source-to-camera map resamples
    it back onto source geometry, and both images are cropped with the
    same placement (see :func:`crop_placement`).

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        Clean crop and aligned degraded crop, both ``out_size`` square.
    """
    clean = check_image(clean, name="clean")
    degraded = check_image(degraded, name="degraded")
    if clean.shape[:2] != degraded.shape[:2]:
        raise ImageValueError(
            f"clean {clean.shape[:2]} and degraded {degraded.shape[:2]} sizes differ"
        )
    hgt, w = clean.shape[:2]
    k = int(out_size)
    ox, oy = crop_placement(h, (w, hgt), k)
    a = _source_to_camera(check_homography(h))
    shift = np.array([[1.0, 0.0, float(ox)], [0.0, 1.0, float(oy)], [0.0, 0.0, 1.0]])
    warp_h = np.linalg.inv(a @ shift)
    warp_h = warp_h / warp_h[2, 2]
    aligned = warp_projective(degraded, warp_h, k)
    return crop(clean, ox, oy, k, k), aligned


def _degrade(src: np.ndarray, h: np.ndarray, cfg: PipelineConfig, seed: int) -> np.ndarray:
    """Run the capture chain (panel through JPEG) at sensor resolution."""
    panel = lcd_subpixel_mosaic(src)
    if cfg.blur_before_warp:
        panel = gaussian_filter(panel, 3, cfg.blur_sigma)
    seen = warp_projective(panel, h, (panel.shape[1], panel.shape[0]))
    if not cfg.blur_before_warp:
        seen = gaussian_filter(seen, 3, cfg.blur_sigma)
    sensor_rgb = seen[_CELL_OFFSET::_CELL, _CELL_OFFSET::_CELL, :]
    raw = bayer_mosaic(sensor_rgb, cfg.cfa_phase)
    noisy = add_gaussian_noise(raw.data, cfg.noise_sigma, rng_from(seed, NOISE_STREAM))
    rgb = demosaic_bilinear(RawImage(data=noisy, phase=raw.phase))
    rgb = bilateral_denoise(rgb, cfg.denoise_strength)
    return jpeg_roundtrip(rgb, cfg.jpeg_quality)


def generate_pair(clean_src, cfg: PipelineConfig | None = None, seed=None) -> MoirePair:
    """Produce one aligned (clean, moire, pattern) triple.

    Parameters
    ----------
    clean_src : array_like
        RGB source, float in [0, 1], even dimensions, at least
        ``cfg.output_size`` on each side. Sources below about
        ``5/3 * output_size`` may fail crop placement for large jitters.
    cfg : PipelineConfig
    seed : int, numpy Generator, or None
        Entry seed; None uses ``cfg.seed``. A Generator is reduced to a
        64-bit seed with one ``integers`` draw.

    The same (source, cfg, seed) always reproduces the pair bit-exactly;
    the pattern image depends only on (source size, cfg, seed).
    """
    cfg = cfg or PipelineConfig()
    src = check_image(clean_src, channels=3, name="clean_src")
    hgt, w = src.shape[:2]
    if hgt % 2 or w % 2:
        raise ImageValueError(f"source dimensions must be even, got {w}x{hgt}")
    if min(hgt, w) < cfg.output_size:
        raise ImageValueError(
            f"source {w}x{hgt} smaller than output_size {cfg.output_size}"
        )
    if seed is None:
        seed = cfg.seed
    elif not isinstance(seed, numbers.Integral):
        seed = int(check_rng(seed).integers(np.iinfo(np.int64).max))
    seed = int(seed)

    h = sample_projective_transform(
        rng_from(seed, GEOMETRY_STREAM), (3 * w, 3 * hgt), cfg.corner_radius_ratio
    )
    degraded = _degrade(src, h, cfg, seed)
    clean_crop, moire_crop = align_and_crop(src, degraded, h, cfg.output_size)
    ox, oy = crop_placement(h, (w, hgt), cfg.output_size)

    white = np.ones_like(src)
    pattern_full = _degrade(white, h, cfg, seed)
    _, pattern_crop = align_and_crop(white, pattern_full, h, cfg.output_size)
    pattern = luminance(pattern_crop)

    meta = {
        "seed": seed,
        "config_hash": cfg.digest(),
        "homography": [float(v) for v in h.reshape(-1)],
        "crop_origin": [ox, oy],
    }
    return MoirePair(clean=clean_crop, moire=moire_crop, pattern=pattern, meta=meta)


class MoireSynthesizer(TransformerMixin, BaseEstimator):
    """Transformer producing MoirePairs from clean RGB sources.

    Parameters mirror :class:`PipelineConfig` plus ``n_jobs`` for parallel
    batch transforms. Item ``i`` of a batch uses the derived seed
    ``derive_seed(seed, "batch", i)``, so results do not depend on worker
    scheduling.

    Examples
    --------
    >>> synth = MoireSynthesizer(output_size=64, seed=7).fit()
    >>> pairs = synth.transform([src])        # doctest: +SKIP
    """

    def __init__(
        self,
        corner_radius_ratio=0.2,
        blur_sigma=1.5,
        noise_sigma=0.01,
        jpeg_quality=85,
        denoise_strength=0.5,
        output_size=1024,
        cfa_phase="RGGB",
        blur_before_warp=False,
        seed=0,
        n_jobs=None,
    ):
        self.corner_radius_ratio = corner_radius_ratio
        self.blur_sigma = blur_sigma
        self.noise_sigma = noise_sigma
        self.jpeg_quality = jpeg_quality
        self.denoise_strength = denoise_strength
        self.output_size = output_size
        self.cfa_phase = cfa_phase
        self.blur_before_warp = blur_before_warp
        self.seed = seed
        self.n_jobs = n_jobs

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            corner_radius_ratio=self.corner_radius_ratio,
            blur_sigma=self.blur_sigma,
            noise_sigma=self.noise_sigma,
            jpeg_quality=self.jpeg_quality,
            denoise_strength=self.denoise_strength,
            output_size=self.output_size,
            cfa_phase=self.cfa_phase,
            blur_before_warp=self.blur_before_warp,
            seed=self.seed,
        )

    def fit(self, X=None, y=None):
        """Validate parameters; the transform itself is stateless."""
        self.config_ = self._config()
        return self

    def transform(self, X) -> list:
        check_is_fitted(self)
        cfg = self.config_
        images = list(X)
        seeds = [derive_seed(cfg.seed, "batch", i) for i in range(len(images))]
        jobs = self.n_jobs or 1
        if jobs == 1:
            return [generate_pair(img, cfg, s) for img, s in zip(images, seeds)]
        return Parallel(n_jobs=jobs)(
            delayed(generate_pair)(img, cfg, s) for img, s in zip(images, seeds)
        )
