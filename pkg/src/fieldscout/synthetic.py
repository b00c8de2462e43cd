"""Synthetic scenery for demos and verification.

Three families: nested gray regions (area-ranked saliency sanity checks), a
tan cliff face with dark patches (the canonical distant-survey target), and a
periphery layout (a hot patch ringed by small colorful flecks that only
resolve close up, exercising coarse-to-fine mask memory).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import SourceScene
from .imaging import RgbImage


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle, half-open on the high edges."""

    x: int
    y: int
    w: int
    h: int

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0

    def contains(self, px: float, py: float, margin: float = 0.0) -> bool:
        return (
            self.x - margin <= px < self.x + self.w + margin
            and self.y - margin <= py < self.y + self.h + margin
        )

    def paint(self, img: np.ndarray, color) -> None:
        img[self.y : self.y + self.h, self.x : self.x + self.w] = color


GRAY_BG = (200, 200, 200)
GRAY_MID = (120, 120, 120)
GRAY_SMALL = (40, 40, 40)

TAN_BANDS = ((150, 128, 92), (196, 168, 120), (232, 206, 160))
DARK_PATCH = (58, 52, 48)
FLECK_COLORS = ((70, 140, 60), (60, 90, 150))


def nested_regions_image(
    width: int = 192,
    height: int = 108,
    mid: Rect = Rect(18, 18, 36, 36),
    small: Rect = Rect(130, 70, 22, 22),
) -> tuple[np.ndarray, tuple[Rect, Rect]]:
    """Three gray regions of strictly decreasing area (background > mid > small)."""
    img = np.zeros((height, width, 3), np.uint8)
    img[...] = GRAY_BG
    mid.paint(img, GRAY_MID)
    small.paint(img, GRAY_SMALL)
    bg_area = width * height - mid.w * mid.h - small.w * small.h
    if not bg_area > mid.w * mid.h > small.w * small.h:
        raise ValueError("regions must have strictly decreasing areas")
    return img, (mid, small)


def cliff_image(
    rng: np.random.Generator,
    width: int = 192,
    height: int = 108,
    patch_sizes: tuple[tuple[int, int], ...] = ((20, 16), (24, 18)),
    margin: int = 24,
    min_patch_gap: float = 55.0,
) -> tuple[np.ndarray, list[Rect]]:
    """A banded tan cliff with randomly placed dark patches.

    Band intensities are far enough apart to segment separately; the patches
    share one dark color and stay clear of the borders and of each other.
    """
    img = np.zeros((height, width, 3), np.uint8)
    band_h = height // len(TAN_BANDS)
    for i, color in enumerate(TAN_BANDS):
        img[i * band_h : height if i == len(TAN_BANDS) - 1 else (i + 1) * band_h] = color

    patches: list[Rect] = []
    for w, h in patch_sizes:
        for _ in range(500):
            x = int(rng.integers(margin, width - margin - w))
            y = int(rng.integers(margin, height - margin - h))
            candidate = Rect(x, y, w, h)
            if all(
                (candidate.cx - p.cx) ** 2 + (candidate.cy - p.cy) ** 2 >= min_patch_gap**2
                for p in patches
            ):
                patches.append(candidate)
                break
        else:
            raise RuntimeError("could not place patches with the requested separation")
    for p in patches:
        p.paint(img, DARK_PATCH)
    return img, patches


def cliff_scene(
    rng: np.random.Generator | None = None,
    width: int = 1536,
    height: int = 1228,
    physical_width: float = 40.0,
    name: str = "cliff",
) -> SourceScene:
    """Large source-image rendition of the cliff for virtual-camera sessions."""
    rng = rng or np.random.default_rng(0)
    img, _ = cliff_image(rng, width=width, height=height, patch_sizes=((120, 96), (144, 108)), margin=200, min_patch_gap=400.0)
    return SourceScene(RgbImage(img), physical_width=physical_width, name=name)


def periphery_scene(
    rng: np.random.Generator,
    width: int = 1280,
    height: int = 1024,
    physical_width: float = 40.0,
    patch_size: int = 64,
    fleck_size: int = 12,
    n_flecks: int = 6,
    ring: tuple[float, float] = (25.0, 45.0),
) -> tuple[SourceScene, Rect, list[Rect]]:
    """Uniform tan wall, one dark hot patch, small colored flecks ringing it.

    The flecks sit ``ring`` pixels outside the patch boundary: too small to
    segment from a distant station, but salient close up, which reproduces the
    periphery failure unless coarse-scale memory deemphasizes them.
    """
    img = np.zeros((height, width, 3), np.uint8)
    img[...] = TAN_BANDS[1]
    px = int(rng.integers(width // 2 - 80, width // 2 + 80 - patch_size))
    py = int(rng.integers(height // 2 - 60, height // 2 + 60 - patch_size))
    patch = Rect(px, py, patch_size, patch_size)
    patch.paint(img, DARK_PATCH)

    def rect_distance(cx: float, cy: float) -> float:
        dx = max(patch.x - cx, 0.0, cx - (patch.x + patch.w))
        dy = max(patch.y - cy, 0.0, cy - (patch.y + patch.h))
        return float(np.hypot(dx, dy))

    flecks: list[Rect] = []
    attempts = 0
    span = patch_size + 2 * int(ring[1]) + fleck_size
    while len(flecks) < n_flecks and attempts < 5000:
        attempts += 1
        fx = int(rng.integers(int(patch.cx) - span // 2, int(patch.cx) + span // 2 - fleck_size))
        fy = int(rng.integers(int(patch.cy) - span // 2, int(patch.cy) + span // 2 - fleck_size))
        candidate = Rect(fx, fy, fleck_size, fleck_size)
        if fx < 0 or fy < 0 or fx + fleck_size > width or fy + fleck_size > height:
            continue
        if not (ring[0] <= rect_distance(candidate.cx, candidate.cy) <= ring[1]):
            continue
        if any(
            abs(candidate.cx - f.cx) < 2 * fleck_size and abs(candidate.cy - f.cy) < 2 * fleck_size
            for f in flecks
        ):
            continue
        candidate.paint(img, FLECK_COLORS[len(flecks) % len(FLECK_COLORS)])
        flecks.append(candidate)
    if len(flecks) < n_flecks:
        raise RuntimeError("could not place the requested flecks")
    return SourceScene(RgbImage(img), physical_width=physical_width, name="periphery"), patch, flecks


def demo_scene(seed: int = 0) -> SourceScene:
    """The bundled demo outcrop used by the README quick start."""
    return cliff_scene(np.random.default_rng(seed), name="demo")
