"""Synthetic clean source images, one recipe per content class.

These stand in for document-page screenshots when exercising the builder
at desk scale: text-like pages (pure black strokes on white), figure-like
pages (smooth tone, no pure samples), and mixed pages. The recipes are
deterministic per (seed, class, index).
"""

from __future__ import annotations

import os

import numpy as np

from .classify import ContentClass
from .errors import ImageValueError
from .io import write_png
from .seeding import rng_from

__all__ = ["make_text_page", "make_figure_page", "make_mixed_page", "make_sample_sources"]


def make_text_page(rng, size: int) -> np.ndarray:
    """White page covered in black stroke rows, fully near-pure."""
    img = np.ones((size, size, 3))
    margin = max(4, size // 16)
    row_h = max(6, size // 24)
    y = margin
    while y + row_h <= size - margin:
        x = margin
        # ragged words along the row
        while True:
            wlen = int(rng.integers(row_h, 3 * row_h))
            if x + wlen > size - margin:
                break
            img[y : y + row_h - 2, x : x + wlen, :] = 0.0
            x += wlen + int(rng.integers(3, row_h))
        y += row_h + 2
    return img


def make_figure_page(rng, size: int) -> np.ndarray:
    """Smooth multi-tone plate with no near-pure samples."""
    yy, xx = np.mgrid[0:size, 0:size] / float(size)
    img = np.zeros((size, size, 3))
    for c in range(3):
        plane = np.zeros((size, size))
        for _ in range(4):
            fx, fy = rng.uniform(0.5, 3.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            plane += rng.uniform(0.3, 1.0) * np.cos(
                2 * np.pi * (fx * xx + fy * yy) + phase
            )
        lo, hi = plane.min(), plane.max()
        img[:, :, c] = (plane - lo) / max(hi - lo, 1e-9)
    # keep every sample comfortably away from pure black/white
    return 0.1 + 0.8 * img


def make_mixed_page(rng, size: int) -> np.ndarray:
    """Text upper part over a figure lower part, near-pure share ~ 40-60%."""
    split = int(size * rng.uniform(0.42, 0.58))
    split -= split % 2
    img = make_figure_page(rng, size)
    text = make_text_page(rng, size)
    img[:split] = text[:split]
    return img


_RECIPES = {
    ContentClass.TEXT_ONLY: make_text_page,
    ContentClass.FIGURE_ONLY: make_figure_page,
    ContentClass.MIXED: make_mixed_page,
}


def make_sample_sources(out_dir, per_class: int = 8, size: int = 192, seed: int = 0) -> list:
    """Write ``3 * per_class`` sample source PNGs and return their paths.

    Files are named ``<class>_<index>.png``; `size` must be even and at
    least 64.
    """
    size = int(size)
    if size < 64 or size % 2:
        raise ImageValueError(f"source size must be even and >= 64, got {size}")
    if per_class < 1:
        raise ImageValueError(f"per_class must be >= 1, got {per_class}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for cls in ContentClass:
        recipe = _RECIPES[cls]
        for i in range(per_class):
            rng = rng_from(seed, "sample-source", cls.value, i)
            img = np.clip(recipe(rng, size), 0.0, 1.0)
            path = os.path.join(out_dir, f"{cls.value.lower()}_{i:03d}.png")
            write_png(path, img)
            paths.append(path)
    return paths
