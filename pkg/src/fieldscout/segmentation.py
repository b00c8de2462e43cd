"""Co-occurrence-histogram segmentation of a quantized plane.

The classic chain: accumulate a GxG co-occurrence histogram over 4-connected
pixel pairs, smooth it, pick up to 8 peaks, assign every populated bin to a
peak by steepest-ascent hill climbing, then label each pixel by majority vote
over its pair assignments. Classes are ranked by pixel area; ranks drive the
uncommonness weighting downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter
from sklearn.base import BaseEstimator

from .imaging import Plane

# 8-neighborhood scan order; also the deterministic tie-break order when climbing.
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True, eq=False)
class CooccurrenceHistogram:
    """Symmetric GxG pair-count matrix for one quantized plane."""

    counts: np.ndarray
    levels: int
    cyclic: bool = False

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (self.levels, self.levels):
            raise ValueError(f"counts must be {self.levels}x{self.levels}, got {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        if not np.array_equal(c, c.T):
            raise ValueError("co-occurrence counts must be symmetric")
        object.__setattr__(self, "counts", c.astype(np.int64, copy=False))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class SegmentationMap:
    """Per-pixel class labels (0 = unsegmented) plus the area ranking.

    ``class_areas[k]`` is the pixel count of class k; ``rank`` lists class ids
    by strictly descending area (ties broken by lower id).
    """

    labels: np.ndarray
    class_areas: dict[int, int]
    rank: tuple[int, ...]

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError("labels must be 2-D")
        object.__setattr__(self, "labels", lab.astype(np.int32, copy=False))
        counts = np.bincount(self.labels.ravel(), minlength=max(self.class_areas, default=0) + 1)
        for k, area in self.class_areas.items():
            if counts[k] != area:
                raise ValueError(f"class {k} area {area} disagrees with labels ({counts[k]})")
        if len(self.class_areas) > 8:
            raise ValueError("at most 8 classes")
        if tuple(sorted(self.class_areas, key=lambda k: (-self.class_areas[k], k))) != self.rank:
            raise ValueError("rank is not the descending-area order")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_areas)


def build_cooccurrence(p: Plane) -> CooccurrenceHistogram:
    """Count value pairs over horizontally and vertically adjacent pixels.

    Each unordered pair (a, b) bumps both counts[a][b] and counts[b][a], so the
    matrix is symmetric and its total is twice the number of pairs.
    """
    if not p.quantized:
        raise ValueError("co-occurrence needs a quantized plane")
    g = p.levels
    v = p.values
    counts = np.zeros((g, g), np.int64)
    pairs_a = np.concatenate([v[:, :-1].ravel(), v[:-1, :].ravel()])
    pairs_b = np.concatenate([v[:, 1:].ravel(), v[1:, :].ravel()])
    np.add.at(counts, (pairs_a, pairs_b), 1)
    np.add.at(counts, (pairs_b, pairs_a), 1)
    return CooccurrenceHistogram(counts, levels=g, cyclic=p.cyclic)


def _neighbors(r: int, c: int, g: int, cyclic: bool):
    for dr, dc in _OFFSETS:
        rr, cc = r + dr, c + dc
        if cyclic:
            yield rr % g, cc % g
        elif 0 <= rr < g and 0 <= cc < g:
            yield rr, cc


class CooccurrenceSegmenter(BaseEstimator):
    """Segments a quantized plane into up to ``max_classes`` area-ranked classes.

    Stateless estimator: parameters are fixed at construction, ``fit`` only
    validates. Use :meth:`segment` for the rich result or the sklearn-style
    :meth:`transform` for a bare label array.

    Parameters
    ----------
    smoothing_sigma : Gaussian sigma (in histogram bins) applied before peak
        detection.
    smoothing_radius : truncation radius of that kernel, in bins.
    peak_fraction : a bin qualifies as a peak only if its smoothed count is at
        least this fraction of the histogram total.
    max_classes : cap on retained peaks; the largest smoothed counts win.
    levels : quantization assumed when ``transform`` receives a bare array
        (Plane inputs carry their own).
    """

    def __init__(
        self,
        smoothing_sigma: float = 1.5,
        smoothing_radius: int = 4,
        peak_fraction: float = 0.001,
        max_classes: int = 8,
        levels: int | None = None,
    ):
        self.smoothing_sigma = smoothing_sigma
        self.smoothing_radius = smoothing_radius
        self.peak_fraction = peak_fraction
        self.max_classes = max_classes
        self.levels = levels

    def fit(self, X=None, y=None):
        if self.max_classes < 1:
            raise ValueError("max_classes must be >= 1")
        if self.smoothing_sigma <= 0 or self.smoothing_radius < 1:
            raise ValueError("smoothing parameters must be positive")
        return self

    def smooth_histogram(self, hist: CooccurrenceHistogram) -> np.ndarray:
        """Smoothed float copy of the counts; hue histograms wrap at the G boundary."""
        mode = "wrap" if hist.cyclic else "constant"
        return gaussian_filter(
            hist.counts.astype(np.float64),
            sigma=self.smoothing_sigma,
            mode=mode,
            radius=self.smoothing_radius,
        )

    def find_peaks(self, smoothed: np.ndarray, hist: CooccurrenceHistogram) -> list[tuple[int, int]]:
        """Up to max_classes local maxima above the mass threshold.

        Returned in descending smoothed-count order (ties by row, then column),
        which is also the class-id order.
        """
        g = hist.levels
        threshold = self.peak_fraction * hist.total
        candidates = []
        for r in range(g):
            for c in range(g):
                val = smoothed[r, c]
                if val < threshold or val <= 0:
                    continue
                if all(val >= smoothed[rr, cc] for rr, cc in _neighbors(r, c, g, hist.cyclic)):
                    candidates.append((r, c))
        candidates.sort(key=lambda rc: (-smoothed[rc], rc[0], rc[1]))
        return candidates[: self.max_classes]

    def assign_bins(
        self, smoothed: np.ndarray, hist: CooccurrenceHistogram, peaks: list[tuple[int, int]]
    ) -> np.ndarray:
        """Map every populated bin to a peak's class id by steepest ascent (0 = none)."""
        g = hist.levels
        peak_class = {rc: i + 1 for i, rc in enumerate(peaks)}
        assignment = np.zeros((g, g), np.int32)
        memo: dict[tuple[int, int], int] = {}

        def climb(r: int, c: int) -> int:
            path = []
            while True:
                if (r, c) in memo:
                    cls = memo[(r, c)]
                    break
                path.append((r, c))
                best_val = smoothed[r, c]
                best = None
                for rr, cc in _neighbors(r, c, g, hist.cyclic):
                    if smoothed[rr, cc] > best_val:
                        best_val = smoothed[rr, cc]
                        best = (rr, cc)
                if best is None:
                    cls = peak_class.get((r, c), 0)
                    break
                r, c = best
            for rc in path:
                memo[rc] = cls
            return cls

        rows, cols = np.nonzero(hist.counts)
        for r, c in zip(rows.tolist(), cols.tolist()):
            assignment[r, c] = climb(r, c)
        return assignment

    def _vote_pixels(self, values: np.ndarray, bin_class: np.ndarray, n: int) -> np.ndarray:
        """Majority vote over each pixel's (own, neighbor) pair assignments.

        Unassigned pairs do not vote; no votes or a tied plurality leaves the
        pixel unsegmented (label 0).
        """
        h, w = values.shape
        padded = np.pad(values, 1, constant_values=-1)
        shifts = {
            "up": padded[:-2, 1:-1],
            "down": padded[2:, 1:-1],
            "left": padded[1:-1, :-2],
            "right": padded[1:-1, 2:],
        }
        tallies = np.zeros((n + 1, h, w), np.int8)
        for nbr in shifts.values():
            valid = nbr >= 0
            cls = np.where(valid, bin_class[values, np.where(valid, nbr, 0)], 0)
            for k in range(1, n + 1):
                tallies[k] += cls == k
        if n == 0:
            return np.zeros((h, w), np.int32)
        class_votes = tallies[1:]
        best_count = class_votes.max(axis=0)
        best_class = class_votes.argmax(axis=0) + 1
        tied = (class_votes == best_count[None]).sum(axis=0) > 1
        return np.where((best_count > 0) & ~tied, best_class, 0).astype(np.int32)

    def segment(self, p: Plane) -> SegmentationMap:
        hist = build_cooccurrence(p)
        smoothed = self.smooth_histogram(hist)
        peaks = self.find_peaks(smoothed, hist)
        bin_class = self.assign_bins(smoothed, hist, peaks)
        labels = self._vote_pixels(p.values, bin_class, len(peaks))

        # drop empty classes, renumber contiguously in peak order
        areas = np.bincount(labels.ravel(), minlength=len(peaks) + 1)
        remap = np.zeros(len(peaks) + 1, np.int32)
        next_id = 1
        for k in range(1, len(peaks) + 1):
            if areas[k] > 0:
                remap[k] = next_id
                next_id += 1
        labels = remap[labels]
        class_areas = {int(remap[k]): int(areas[k]) for k in range(1, len(peaks) + 1) if areas[k] > 0}
        rank = tuple(sorted(class_areas, key=lambda k: (-class_areas[k], k)))
        return SegmentationMap(labels=labels, class_areas=class_areas, rank=rank)

    def transform(self, X) -> np.ndarray:
        """Label array for a Plane or a bare quantized level array."""
        plane = self._as_plane(X)
        return self.segment(plane).labels

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)

    def _as_plane(self, X) -> Plane:
        if isinstance(X, Plane):
            return X
        arr = np.asarray(X)
        levels = self.levels if self.levels is not None else int(arr.max()) + 1
        return Plane(arr.astype(np.int32), levels=levels)


def segment_plane(p: Plane, params: CooccurrenceSegmenter | None = None, **overrides) -> SegmentationMap:
    """Convenience wrapper: segment with default or overridden parameters."""
    seg = params if params is not None else CooccurrenceSegmenter(**overrides)
    return seg.fit().segment(p)


def rank_classes(m: SegmentationMap) -> tuple[int, ...]:
    """Class ids by strictly descending area; ties broken by lower id."""
    return tuple(sorted(m.class_areas, key=lambda k: (-m.class_areas[k], k)))
