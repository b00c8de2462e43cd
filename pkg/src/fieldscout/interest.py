"""Uncommonness weighting, interest maps, and interest-point extraction.

A segmentation's area ranking is linearly reversed into an uncommon map
(largest class -> 1, smallest -> n), the three per-channel uncommon maps sum
into an interest map, and the blurred interest map's largest peaks become the
ranked re-pointing targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .segmentation import SegmentationMap
from .validation import check_map_2d, check_same_shape

#: Marker colors for point ranks 1..3.
RANK_COLORS = {1: "green", 2: "blue", 3: "red"}

#: Segment-class colors for ranks 1..8 (largest area first); 0 renders black.
CLASS_RANK_COLORS = (
    ("red", (255, 0, 0)),
    ("blue", (0, 0, 255)),
    ("purple", (128, 0, 128)),
    ("green", (0, 255, 0)),
    ("cyan", (0, 255, 255)),
    ("yellow", (255, 255, 0)),
    ("white", (255, 255, 255)),
    ("orange", (255, 165, 0)),
)


@dataclass(frozen=True)
class InterestPoint:
    """A ranked target in mosaic pixel coordinates."""

    x: int
    y: int
    rank: int
    score: float

    @property
    def color(self) -> str:
        return RANK_COLORS.get(self.rank, "gray")

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "rank": self.rank, "score": self.score, "color": self.color}


def uncommon_map(m: SegmentationMap) -> np.ndarray:
    """Linear reversal of the area ranking: the largest class maps to 1, the
    smallest of n classes to n, and label-0 pixels to 0.

    Uncommonness therefore runs 1 (common) .. n (uncommon), and unsegmented
    pixels contribute nothing downstream.
    """
    lut = np.zeros(m.n_classes + 1, np.int32)
    for r, cls in enumerate(m.rank, start=1):
        lut[cls] = r
    return lut[m.labels]


def interest_sum(uh: np.ndarray, us: np.ndarray, ui: np.ndarray) -> np.ndarray:
    """Unweighted pointwise sum of the three per-channel uncommon maps."""
    uh, us, ui = (np.asarray(a) for a in (uh, us, ui))
    check_same_shape(uh, us, ui)
    return uh.astype(np.int64) + us + ui


def blur_interest(m: np.ndarray, width: int = 10) -> np.ndarray:
    """Normalized Gaussian blur with sigma = width/2, support radius 2*width.

    Reflective borders; preserves constants and (away from borders) total mass.
    """
    if width < 1:
        raise ValueError("blur width must be >= 1")
    arr = check_map_2d(m, "interest map")
    return gaussian_filter(arr, sigma=width / 2.0, radius=2 * width, mode="reflect")


def top_interest_points(
    m: np.ndarray, k: int = 3, min_separation: float = 20.0
) -> list[InterestPoint]:
    """Greedy peak picking on a blurred interest map.

    Repeatedly takes the global maximum (ties resolved to the smallest y, then
    x), then zeroes a disk of radius ``min_separation`` around it. Stops after
    k points, when the remaining maximum is 0, or when the remaining map has no
    contrast (relative range below 1e-12: a plateau has no peaks), so fewer
    than k points can come back.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    work = check_map_2d(m, "interest map").copy()
    h, w = work.shape
    yy, xx = np.mgrid[0:h, 0:w]
    points: list[InterestPoint] = []
    for rank in range(1, k + 1):
        flat = int(np.argmax(work))
        y, x = divmod(flat, w)
        score = float(work[y, x])
        if score <= 0.0 or (score - float(work.min())) <= 1e-12 * score:
            break
        points.append(InterestPoint(x=int(x), y=int(y), rank=rank, score=score))
        suppress = (yy - y) ** 2 + (xx - x) ** 2 <= min_separation**2
        work[suppress] = 0.0
    return points
