"""End-to-end analysis of one color mosaic: segment, weigh, blur, pick targets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .imaging import HsiImage, RgbImage, rgb_to_hsi
from .interest import InterestPoint, blur_interest, interest_sum, top_interest_points, uncommon_map
from .segmentation import CooccurrenceSegmenter, SegmentationMap

CHANNELS = ("h", "s", "i")


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    """Every artifact the per-image chain produces, keyed by channel where relevant."""

    hsi: HsiImage
    segmentations: dict[str, SegmentationMap]
    uncommon: dict[str, np.ndarray]
    interest_raw: np.ndarray
    interest_blur: np.ndarray
    points: list[InterestPoint]
    mask: np.ndarray | None = None

    @property
    def width(self) -> int:
        return self.interest_raw.shape[1]

    @property
    def height(self) -> int:
        return self.interest_raw.shape[0]


class MosaicAnalyzer(BaseEstimator):
    """Stateless estimator running the full uncommonness chain on one image.

    ``analyze`` returns the rich result; the sklearn aliases map ``transform``
    to the blurred interest map and ``predict`` to the (k, 2) array of ranked
    point coordinates, so the chain drops into ordinary pipelines.

    Parameters mirror the processing stages: ``levels`` quantizes the H, S, I
    planes; segmentation knobs feed the per-channel CooccurrenceSegmenter;
    ``blur_width`` sets the Gaussian used before peak extraction; ``top_k``
    and ``min_separation`` control greedy peak picking (separation defaults
    to twice the blur width).
    """

    def __init__(
        self,
        levels: int = 64,
        blur_width: int = 10,
        top_k: int = 3,
        min_separation: float | None = None,
        smoothing_sigma: float = 1.5,
        smoothing_radius: int = 4,
        peak_fraction: float = 0.001,
        max_classes: int = 8,
    ):
        self.levels = levels
        self.blur_width = blur_width
        self.top_k = top_k
        self.min_separation = min_separation
        self.smoothing_sigma = smoothing_sigma
        self.smoothing_radius = smoothing_radius
        self.peak_fraction = peak_fraction
        self.max_classes = max_classes

    def _segmenter(self) -> CooccurrenceSegmenter:
        return CooccurrenceSegmenter(
            smoothing_sigma=self.smoothing_sigma,
            smoothing_radius=self.smoothing_radius,
            peak_fraction=self.peak_fraction,
            max_classes=self.max_classes,
        ).fit()

    @property
    def separation(self) -> float:
        return 2.0 * self.blur_width if self.min_separation is None else self.min_separation

    def fit(self, X=None, y=None):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.blur_width < 1:
            raise ValueError("blur_width must be >= 1")
        return self

    def analyze(self, image, mask: np.ndarray | None = None) -> AnalysisResult:
        """Run the whole chain on an RgbImage or (H, W, 3) uint8 array."""
        img = image if isinstance(image, RgbImage) else RgbImage(np.asarray(image))
        hsi = rgb_to_hsi(img, levels=self.levels)
        return self.analyze_planes(hsi, mask=mask)

    def analyze_planes(self, hsi: HsiImage, mask: np.ndarray | None = None) -> AnalysisResult:
        """Run the chain on already-mosaicked H, S, I planes.

        ``mask`` (weights in [0, 1], e.g. from coarse-scale memory) multiplies
        the summed interest map before blurring and peak extraction.
        """
        seg = self._segmenter()
        segmentations = {ch: seg.segment(plane) for ch, plane in hsi.planes.items()}
        uncommon = {ch: uncommon_map(m) for ch, m in segmentations.items()}
        raw = interest_sum(uncommon["h"], uncommon["s"], uncommon["i"])
        weighted = raw if mask is None else raw * np.asarray(mask, np.float64)
        blurred = blur_interest(weighted, width=self.blur_width)
        points = top_interest_points(blurred, k=self.top_k, min_separation=self.separation)
        return AnalysisResult(
            hsi=hsi,
            segmentations=segmentations,
            uncommon=uncommon,
            interest_raw=raw,
            interest_blur=blurred,
            points=points,
            mask=None if mask is None else np.asarray(mask, np.float64),
        )

    def transform(self, X) -> np.ndarray:
        return self.analyze(X).interest_blur

    def predict(self, X) -> np.ndarray:
        pts = self.analyze(X).points
        return np.array([[p.x, p.y] for p in pts], dtype=np.int64).reshape(-1, 2)

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
