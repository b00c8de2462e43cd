"""Raster primitives: color planes, HSI conversion, downsampling, butt-mosaicking.

Everything downstream (segmentation, interest maps, the virtual camera) works on
these containers. Planes are either real-valued or quantized to G integer levels;
the hue plane is cyclic (level 0 adjacent to level G-1), saturation and intensity
are linear.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .validation import check_plane_values, check_rgb_pixels


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit color raster, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", check_rgb_pixels(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class Plane:
    """Single-channel raster.

    ``levels`` is None for real-valued planes; otherwise values are integer
    quantization levels in [0, levels-1]. ``cyclic`` marks a channel whose level
    axis wraps (hue).
    """

    values: np.ndarray
    levels: int | None = None
    cyclic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", check_plane_values(self.values, self.levels))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def quantized(self) -> bool:
        return self.levels is not None


@dataclass(frozen=True, eq=False)
class HsiImage:
    """Hue/saturation/intensity decomposition; the three planes share dimensions."""

    h: Plane
    s: Plane
    i: Plane

    def __post_init__(self):
        dims = {(p.height, p.width) for p in (self.h, self.s, self.i)}
        if len(dims) != 1:
            raise ValueError(f"H, S, I planes disagree on dimensions: {sorted(dims)}")
        if not self.h.cyclic:
            raise ValueError("hue plane must be cyclic")

    @property
    def planes(self) -> dict[str, Plane]:
        return {"h": self.h, "s": self.s, "i": self.i}


@dataclass(frozen=True)
class MosaicSpec:
    """Grid layout of a butted mosaic: cols x rows tiles of sub_width x sub_height."""

    cols: int
    rows: int
    sub_width: int
    sub_height: int

    def __post_init__(self):
        for name in ("cols", "rows", "sub_width", "sub_height"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def width(self) -> int:
        return self.cols * self.sub_width

    @property
    def height(self) -> int:
        return self.rows * self.sub_height


def rgb_to_hsi(img: RgbImage, levels: int = 64) -> HsiImage:
    """Convert to quantized H, S, I planes using the bi-conic decomposition.

    I = (r+g+b)/3, S = 1 - min(r,g,b)/I (0 for black), H = the arccos hue angle.
    Achromatic pixels (r=g=b) take S = 0 and the hue sentinel level 0. Hue is
    quantized by flooring onto G cyclic bins so that a 120-degree rotation of
    saturated colors lands G/3 bins away; S and I round onto [0, G-1].
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    px = img.pixels
    rgb = px.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]

    i = (r + g + b) / 3.0
    mn = rgb.min(axis=-1)
    achromatic = (px.max(axis=-1) == px.min(axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(i > 0, 1.0 - mn / np.where(i > 0, i, 1.0), 0.0)
    s = np.where(achromatic, 0.0, s)
    s = np.clip(s, 0.0, 1.0)

    num = 0.5 * ((r - g) + (r - b))
    den_sq = (r - g) ** 2 + (r - b) * (g - b)
    den = np.sqrt(np.maximum(den_sq, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_t = np.clip(np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0), -1.0, 1.0)
    theta = np.degrees(np.arccos(cos_t))
    hue = np.where(b <= g, theta, 360.0 - theta)
    hue = np.where(achromatic, 0.0, hue)

    h_lvl = np.floor(hue / 360.0 * levels).astype(np.int32) % levels
    s_lvl = np.rint(s * (levels - 1)).astype(np.int32)
    i_lvl = np.rint(i * (levels - 1)).astype(np.int32)

    return HsiImage(
        h=Plane(h_lvl, levels=levels, cyclic=True),
        s=Plane(s_lvl, levels=levels),
        i=Plane(i_lvl, levels=levels),
    )


def area_weights(src_size: int, out_size: int, lo: float = 0.0, hi: float | None = None) -> np.ndarray:
    """Exact area-overlap resampling weights from source cells onto output cells.

    Returns a (out_size, src_size) matrix whose row j holds each source pixel's
    fractional coverage of output cell j over the source window [lo, hi). Rows
    are normalized by the full output cell width, so windows extending past the
    source raster lose mass (the caller reads that as black fill).
    """
    if out_size < 1:
        raise ValueError("output size must be >= 1")
    if hi is None:
        hi = float(src_size)
    if hi <= lo:
        raise ValueError("empty resampling window")
    cell = (hi - lo) / out_size
    edges_lo = lo + cell * np.arange(out_size)
    edges_hi = edges_lo + cell
    src_lo = np.arange(src_size, dtype=np.float64)
    overlap = np.minimum(edges_hi[:, None], src_lo[None, :] + 1.0) - np.maximum(
        edges_lo[:, None], src_lo[None, :]
    )
    np.clip(overlap, 0.0, None, out=overlap)
    return overlap / cell


def downsample(p: Plane, out_w: int, out_h: int) -> Plane:
    """Area-weighted average resampling to (out_w, out_h); output is real-valued."""
    if out_w < 1 or out_h < 1:
        raise ValueError("target dimensions must be >= 1")
    if out_w > p.width or out_h > p.height:
        raise ValueError("downsample target exceeds source dimensions")
    wx = area_weights(p.width, out_w)
    wy = area_weights(p.height, out_h)
    vals = wy @ p.values.astype(np.float64) @ wx.T
    return Plane(vals, levels=None, cyclic=p.cyclic)


def quantize(p: Plane, levels: int) -> Plane:
    """Round a real-valued plane back onto integer levels, clamping to [0, G-1]."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    lvl = np.clip(np.rint(p.values), 0, levels - 1).astype(np.int32)
    return Plane(lvl, levels=levels, cyclic=p.cyclic)


def butt_mosaic(tiles: Sequence[Sequence[Plane]], spec: MosaicSpec) -> Plane:
    """Compose tiles edge-to-edge with no blending.

    ``tiles[r][c]`` lands at block (c*sub_width, r*sub_height). All tiles must
    match the spec's sub-image size and agree on quantization.
    """
    if len(tiles) != spec.rows or any(len(row) != spec.cols for row in tiles):
        raise ValueError(f"tile grid must be {spec.rows}x{spec.cols}")
    first = tiles[0][0]
    for row in tiles:
        for t in row:
            if (t.width, t.height) != (spec.sub_width, spec.sub_height):
                raise ValueError(
                    f"tile size {t.width}x{t.height} does not match spec "
                    f"{spec.sub_width}x{spec.sub_height}"
                )
            if t.levels != first.levels or t.cyclic != first.cyclic:
                raise ValueError("tiles disagree on quantization or cyclicity")
    rows = [np.hstack([t.values for t in row]) for row in tiles]
    return Plane(np.vstack(rows), levels=first.levels, cyclic=first.cyclic)
