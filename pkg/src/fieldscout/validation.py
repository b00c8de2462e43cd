"""Input validation helpers shared by the estimators and raster types."""

from __future__ import annotations

import numpy as np


def check_rgb_pixels(pixels) -> np.ndarray:
    """Coerce to a (H, W, 3) uint8 array or raise ValueError."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) pixel array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise ValueError(f"pixel data must be 8-bit intensities, got dtype {arr.dtype}")
    return arr


def check_plane_values(values, levels: int | None) -> np.ndarray:
    """Validate plane data against its declared quantization."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("plane must be at least 1x1")
    if levels is not None:
        if levels < 2:
            raise ValueError("quantization needs at least 2 levels")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("quantized plane must hold integer levels")
        if arr.min() < 0 or arr.max() >= levels:
            raise ValueError(f"quantized values must lie in [0, {levels - 1}]")
        arr = arr.astype(np.int32, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    return arr


def check_map_2d(values, name: str = "map") -> np.ndarray:
    """Coerce to a 2-D float array, rejecting NaNs."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ValueError(f"{name} contains NaN")
    return arr


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"shape mismatch: {sorted(shapes)}")
