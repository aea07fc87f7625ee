"""Full-reference image quality metrics and submission scoring.

PSNR and SSIM operate on 8-bit storage rasters. PSNR uses the usual
``10 log10(255^2 / MSE)`` over all samples with a 100 dB cap for identical
images. SSIM is the single-scale Gaussian-window variant: 11x11 window,
sigma 1.5, C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2, population
(window-weighted) moments, computed per channel over the valid window map
and averaged.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .classify import ContentClass
from .errors import (
    DimensionMismatchError,
    ImageValueError,
    MissingResultsError,
)
from .filters import gaussian_kernel1d
from .validation import check_u8_image

__all__ = [
    "psnr",
    "ssim",
    "ScorePair",
    "EvaluationReport",
    "LeaderboardRow",
    "evaluate_submission",
    "leaderboard",
    "format_report",
    "format_leaderboard",
    "REPORT_FORMAT",
]

PSNR_CAP_DB = 100.0
REPORT_FORMAT = "moirebench-report/1"

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


def _check_pair(ref, img):
    ref = check_u8_image(ref, name="ref")
    img = check_u8_image(img, name="img")
    if ref.shape != img.shape:
        raise DimensionMismatchError(f"shape mismatch: ref {ref.shape} vs img {img.shape}")
    return ref, img


def psnr(ref, img) -> float:
    """Peak signal-to-noise ratio between two uint8 images, in dB.

    Identical images return the 100 dB cap instead of infinity.
    """
    ref, img = _check_pair(ref, img)
    diff = ref.astype(np.float64) - img.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(255.0**2 / mse), PSNR_CAP_DB)


def _window_mean(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    half = kernel.size // 2
    out = ndimage.correlate1d(plane, kernel, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="reflect")
    return out[half:-half, half:-half]


def _ssim_plane(x: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    mu_x = _window_mean(x, kernel)
    mu_y = _window_mean(y, kernel)
    sxx = _window_mean(x * x, kernel) - mu_x * mu_x
    syy = _window_mean(y * y, kernel) - mu_y * mu_y
    sxy = _window_mean(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _C1) * (2.0 * sxy + _C2)
    den = (mu_x * mu_x + mu_y * mu_y + _C1) * (sxx + syy + _C2)
    return float(np.mean(num / den))


def ssim(ref, img) -> float:
    """Structural similarity between two uint8 images.

    The mean is taken over the valid window map (positions whose 11x11
    window lies fully inside the image), per channel, then averaged over
    channels. Images must be at least 11 px on each side.
    """
    ref, img = _check_pair(ref, img)
    h, w = ref.shape[:2]
    if h < _SSIM_WINDOW or w < _SSIM_WINDOW:
        raise ImageValueError(f"images must be at least {_SSIM_WINDOW} px per side, got {w}x{h}")
    kernel = gaussian_kernel1d(_SSIM_WINDOW, _SSIM_SIGMA)
    rf = ref.astype(np.float64)
    mf = img.astype(np.float64)
    if rf.ndim == 2:
        return _ssim_plane(rf, mf, kernel)
    vals = [_ssim_plane(rf[:, :, c], mf[:, :, c], kernel) for c in range(rf.shape[2])]
    return float(np.mean(vals))


@dataclass(frozen=True)
class ScorePair:
    psnr: float
    ssim: float


@dataclass
class EvaluationReport:
    """Scores for one submission against dataset ground truth."""

    name: str
    split: str
    overall: ScorePair
    per_class: dict  # class name -> {"count": int, "psnr": float, "ssim": float}
    per_image: list = field(default_factory=list)  # {"id", "content_class", "psnr", "ssim"}

    def to_json(self) -> str:
        payload = {
            "format": REPORT_FORMAT,
            "name": self.name,
            "split": self.split,
            "overall": {"psnr": self.overall.psnr, "ssim": self.overall.ssim},
            "per_class": self.per_class,
            "per_image": self.per_image,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvaluationReport":
        payload = json.loads(text)
        if payload.get("format") != REPORT_FORMAT:
            raise ImageValueError(f"not a {REPORT_FORMAT} document")
        return cls(
            name=payload["name"],
            split=payload["split"],
            overall=ScorePair(**payload["overall"]),
            per_class=payload["per_class"],
            per_image=payload["per_image"],
        )


def evaluate_submission(results_dir, dataset_dir, *, split: str = "test", name: str | None = None):
    """Score one results directory against a dataset's clean images.

    `results_dir` must hold one ``<id>.png`` per manifest entry of the
    chosen split. Overall scores are arithmetic means of per-image scores;
    per-class aggregates group by the manifest's content class.

    Raises
    ------
    MissingResultsError
        Listing every entry id without a result file.
    DimensionMismatchError
        If a result's dimensions differ from its ground truth.
    """
    from .dataset import load_manifest  # local import to avoid a cycle
    from .io import read_image_u8

    manifest = load_manifest(dataset_dir)
    if os.path.isfile(dataset_dir):  # explicit manifest path
        dataset_dir = os.path.dirname(os.path.abspath(dataset_dir))
    entries = [e for e in manifest.entries if e.split == split]
    if not entries:
        raise MissingResultsError(f"dataset has no entries in split {split!r}")

    missing = [
        e.id for e in entries if not os.path.isfile(os.path.join(results_dir, e.id + ".png"))
    ]
    if missing:
        raise MissingResultsError(
            f"results missing for {len(missing)} entr{'y' if len(missing) == 1 else 'ies'}: "
            + ", ".join(sorted(missing))
        )

    per_image = []
    for e in entries:
        gt = read_image_u8(os.path.join(dataset_dir, e.files["clean"]))
        out = read_image_u8(os.path.join(results_dir, e.id + ".png"))
        if gt.shape != out.shape:
            raise DimensionMismatchError(
                f"{e.id}: result shape {out.shape} does not match ground truth {gt.shape}"
            )
        per_image.append(
            {
                "id": e.id,
                "content_class": e.content_class,
                "psnr": psnr(gt, out),
                "ssim": ssim(gt, out),
            }
        )

    overall = ScorePair(
        psnr=float(np.mean([r["psnr"] for r in per_image])),
        ssim=float(np.mean([r["ssim"] for r in per_image])),
    )
    per_class = {}
    for cls in ContentClass:
        rows = [r for r in per_image if r["content_class"] == cls.value]
        if rows:
            per_class[cls.value] = {
                "count": len(rows),
                "psnr": float(np.mean([r["psnr"] for r in rows])),
                "ssim": float(np.mean([r["ssim"] for r in rows])),
            }
    return EvaluationReport(
        name=name or os.path.basename(os.path.normpath(results_dir)),
        split=split,
        overall=overall,
        per_class=per_class,
        per_image=per_image,
    )


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int
    name: str
    psnr: float
    ssim: float
    mos: float | None = None


def leaderboard(reports, *, rank_key: str = "psnr", mos_scores=None) -> list:
    """Rank submissions by PSNR or MOS, descending.

    Parameters
    ----------
    reports : dict
        Mapping of submission name to :class:`EvaluationReport`.
    rank_key : str
        "psnr" or "mos".
    mos_scores : dict or None
        Mapping of submission name to MOS value; required for
        ``rank_key="mos"`` and attached to rows when given.

    Ties on the rank key break by SSIM (descending), then name (ascending).
    """
    if rank_key not in ("psnr", "mos"):
        raise ImageValueError(f"rank_key must be 'psnr' or 'mos', got {rank_key!r}")
    mos_scores = mos_scores or {}
    if rank_key == "mos":
        absent = sorted(set(reports) - set(mos_scores))
        if absent:
            raise ImageValueError(f"no MOS score for: {', '.join(absent)}")

    def key(item):
        name, rep = item
        primary = mos_scores[name] if rank_key == "mos" else rep.overall.psnr
        return (-primary, -rep.overall.ssim, name)

    rows = []
    for rank, (name, rep) in enumerate(sorted(reports.items(), key=key), start=1):
        rows.append(
            LeaderboardRow(
                rank=rank,
                name=name,
                psnr=rep.overall.psnr,
                ssim=rep.overall.ssim,
                mos=mos_scores.get(name),
            )
        )
    return rows


_CLASS_TAGS = {
    ContentClass.TEXT_ONLY.value: "T",
    ContentClass.FIGURE_ONLY.value: "F",
    ContentClass.MIXED.value: "M",
}


def format_report(report: EvaluationReport) -> str:
    """Human-readable score table with overall and per-class (T/F/M) rows."""
    lines = [
        f"submission: {report.name}   split: {report.split}   images: {len(report.per_image)}",
        "",
        f"{'class':<18}{'n':>5}  {'PSNR':>8}  {'SSIM':>7}",
    ]
    lines.append(
        f"{'overall':<18}{len(report.per_image):>5}  "
        f"{report.overall.psnr:>8.2f}  {report.overall.ssim:>7.4f}"
    )
    for cls in ContentClass:
        stats = report.per_class.get(cls.value)
        if stats is None:
            continue
        label = f"{_CLASS_TAGS[cls.value]} ({cls.value})"
        lines.append(
            f"{label:<18}{stats['count']:>5}  {stats['psnr']:>8.2f}  {stats['ssim']:>7.4f}"
        )
    return "\n".join(lines) + "\n"


def format_leaderboard(rows) -> str:
    """Aligned leaderboard table; MOS column included when any row has it."""
    with_mos = any(r.mos is not None for r in rows)
    head = f"{'rank':>4}  {'team':<24}{'PSNR':>8}  {'SSIM':>7}"
    if with_mos:
        head += f"  {'MOS':>6}"
    lines = [head]
    for r in rows:
        line = f"{r.rank:>4}  {r.name:<24}{r.psnr:>8.2f}  {r.ssim:>7.4f}"
        if with_mos:
            line += f"  {r.mos if r.mos is not None else '-':>6}"
        lines.append(line)
    return "\n".join(lines) + "\n"
