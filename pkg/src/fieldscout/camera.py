"""Virtual pan-tilt-zoom camera over a large source scene.

A flat pinhole stand-in for the tripod rig: the scene is a wall-sized image a
known physical width across, and distance/zoom act purely through the footprint
the sensor subtends on it. Pointing is exact, so mosaic tiles butt perfectly
and every acquisition is a deterministic function of (scene, pose, spec).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .imaging import MosaicSpec, Plane, RgbImage, area_weights, butt_mosaic, downsample, quantize, rgb_to_hsi
from .interest import InterestPoint

SENSOR_WIDTH = 360
SENSOR_HEIGHT = 288


@dataclass(frozen=True, eq=False)
class SourceScene:
    """The outcrop: a large raster plus the physical width it represents."""

    image: RgbImage
    physical_width: float
    name: str = "scene"

    def __post_init__(self):
        if self.physical_width <= 0:
            raise ValueError("physical_width must be positive (meters)")

    @property
    def px_per_meter(self) -> float:
        return self.image.width / self.physical_width

    @property
    def physical_height(self) -> float:
        return self.image.height / self.px_per_meter

    @classmethod
    def load(cls, descriptor: str | Path) -> "SourceScene":
        """Read a JSON descriptor {image, physical_width_m, name}; the image
        path resolves relative to the descriptor."""
        descriptor = Path(descriptor)
        meta = json.loads(descriptor.read_text())
        from .io import load_image

        img = load_image(descriptor.parent / meta["image"])
        return cls(image=img, physical_width=float(meta["physical_width_m"]), name=meta.get("name", descriptor.stem))

    def save(self, directory: str | Path, stem: str | None = None) -> Path:
        from .io import dump_json, save_rgb_png

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        save_rgb_png(self.image, directory / f"{stem}.png")
        descriptor = directory / f"{stem}.json"
        dump_json(
            {"image": f"{stem}.png", "physical_width_m": self.physical_width, "name": self.name},
            descriptor,
        )
        return descriptor


@dataclass(frozen=True)
class PointingEntry:
    kind: str  # 'frame' | 'tile' | 'chip'
    pan: float
    tilt: float
    seq: int  # logical timestamp: monotonically increasing acquisition index
    source_rect: tuple[float, float, float, float]  # scene px (x0, y0, x1, y1)
    clipped: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "pan": self.pan,
            "tilt": self.tilt,
            "seq": self.seq,
            "source_rect": list(self.source_rect),
            "clipped": self.clipped,
        }


class PointingLog:
    """Append-only record of every acquisition's pose and source rectangle."""

    def __init__(self):
        self.entries: list[PointingEntry] = []

    def record(self, kind: str, pan: float, tilt: float, rect, clipped: bool) -> PointingEntry:
        entry = PointingEntry(
            kind=kind, pan=pan, tilt=tilt, seq=len(self.entries), source_rect=tuple(rect), clipped=clipped
        )
        self.entries.append(entry)
        return entry

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.entries)


@dataclass(frozen=True)
class MosaicGeometry:
    """Affine link between mosaic pixels and scene pixels for one acquisition."""

    x0: float
    y0: float
    scale_x: float  # scene px per mosaic px
    scale_y: float
    width: int
    height: int

    def mosaic_to_scene(self, px: float, py: float) -> tuple[float, float]:
        return self.x0 + px * self.scale_x, self.y0 + py * self.scale_y

    def pixel_center_to_scene(self, ix: int, iy: int) -> tuple[float, float]:
        return self.mosaic_to_scene(ix + 0.5, iy + 0.5)

    def scene_to_mosaic(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.x0) / self.scale_x, (y - self.y0) / self.scale_y

    def contains(self, px: float, py: float) -> bool:
        return 0 <= px < self.width and 0 <= py < self.height

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "y0": self.y0,
            "scale_x": self.scale_x,
            "scale_y": self.scale_y,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MosaicGeometry":
        return cls(**d)


@dataclass(eq=False)
class MosaicCapture:
    """Output of one mosaic sweep: per-channel tile grids ready for butting."""

    grids: dict[str, list[list[Plane]]]
    spec: MosaicSpec
    geometry: MosaicGeometry
    log: PointingLog

    def planes(self) -> dict[str, Plane]:
        return {ch: butt_mosaic(grid, self.spec) for ch, grid in self.grids.items()}


def _resample_window(pixels: np.ndarray, x0: float, y0: float, x1: float, y1: float, out_w: int, out_h: int) -> np.ndarray:
    """Area-average a float scene window onto the sensor; off-scene area reads black."""
    src_h, src_w = pixels.shape[:2]
    ix0 = max(0, int(math.floor(x0)))
    ix1 = min(src_w, max(ix0 + 1, int(math.ceil(x1))))
    iy0 = max(0, int(math.floor(y0)))
    iy1 = min(src_h, max(iy0 + 1, int(math.ceil(y1))))
    crop = pixels[iy0:iy1, ix0:ix1].astype(np.float64)
    wx = area_weights(ix1 - ix0, out_w, lo=x0 - ix0, hi=x1 - ix0)
    wy = area_weights(iy1 - iy0, out_h, lo=y0 - iy0, hi=y1 - iy0)
    out = np.empty((out_h, out_w, 3), np.uint8)
    for c in range(3):
        vals = wy @ crop[..., c] @ wx.T
        out[..., c] = np.clip(np.rint(vals), 0, 255).astype(np.uint8)
    return out


@dataclass(frozen=True)
class VirtualCamera:
    """Pose + optics over a SourceScene.

    Pan (+right) and tilt (+up) are degrees; the boresight at pan = tilt = 0
    hits the scene center. At zoom 1 the footprint a distance d subtends is
    2 * d * tan(base_fov / 2) across, with height scaled by the sensor aspect;
    zoom divides the footprint exactly (so doubling zoom halves both sides),
    and the reported effective field of view is base_fov / zoom.
    """

    scene: SourceScene
    distance: float
    pan: float = 0.0
    tilt: float = 0.0
    zoom: float = 1.0
    base_fov: float = 30.0
    sensor: tuple[int, int] = (SENSOR_WIDTH, SENSOR_HEIGHT)
    max_zoom: float = 25.0

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError("distance must be positive")
        if not (1.0 <= self.zoom <= self.max_zoom):
            raise ValueError(f"zoom must lie in [1, {self.max_zoom}]")
        if not (0 < self.base_fov < 180):
            raise ValueError("base_fov must lie in (0, 180) degrees")

    @property
    def fov(self) -> float:
        return self.base_fov / self.zoom

    def footprint_meters(self) -> tuple[float, float]:
        w = 2.0 * self.distance * math.tan(math.radians(self.base_fov) / 2.0) / self.zoom
        return w, w * self.sensor[1] / self.sensor[0]

    def footprint_pixels(self) -> tuple[float, float]:
        w, h = self.footprint_meters()
        ppm = self.scene.px_per_meter
        return w * ppm, h * ppm

    def boresight_scene(self) -> tuple[float, float]:
        ppm = self.scene.px_per_meter
        cx = self.scene.image.width / 2.0 + self.distance * math.tan(math.radians(self.pan)) * ppm
        cy = self.scene.image.height / 2.0 - self.distance * math.tan(math.radians(self.tilt)) * ppm
        return cx, cy

    def pose_toward(self, scene_x: float, scene_y: float) -> tuple[float, float]:
        """Pan/tilt that would center the boresight on a scene pixel position."""
        ppm = self.scene.px_per_meter
        dx_m = (scene_x - self.scene.image.width / 2.0) / ppm
        dy_m = (self.scene.image.height / 2.0 - scene_y) / ppm
        return math.degrees(math.atan2(dx_m, self.distance)), math.degrees(math.atan2(dy_m, self.distance))

    def _window(self) -> tuple[float, float, float, float]:
        cx, cy = self.boresight_scene()
        w, h = self.footprint_pixels()
        return cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0

    def _window_state(self, rect) -> str:
        x0, y0, x1, y1 = rect
        if x1 <= 0 or y1 <= 0 or x0 >= self.scene.image.width or y0 >= self.scene.image.height:
            return "outside"
        if x0 < 0 or y0 < 0 or x1 > self.scene.image.width or y1 > self.scene.image.height:
            return "clipped"
        return "inside"

    def _acquire_rect(self, rect, log: PointingLog | None, kind: str, pan: float, tilt: float) -> RgbImage:
        state = self._window_state(rect)
        if state == "outside":
            raise ValueError(f"camera footprint {rect} lies entirely outside the scene")
        px = _resample_window(self.scene.image.pixels, *rect, self.sensor[0], self.sensor[1])
        if log is not None:
            log.record(kind, pan, tilt, rect, clipped=state == "clipped")
        return RgbImage(px)

    def acquire_subimage(self, log: PointingLog | None = None, kind: str = "frame") -> RgbImage:
        """One sensor-resolution color frame at the current pose."""
        return self._acquire_rect(self._window(), log, kind, self.pan, self.tilt)

    def acquire_mosaic(self, spec: MosaicSpec, levels: int = 64) -> MosaicCapture:
        """Sweep a rows x cols grid around the current boresight.

        Tiles are laid out left-to-right, top-to-bottom over an exact partition
        of the covered scene rectangle (the per-tile pointing angles are the
        exact inverse of each tile's center). Each tile is converted to H, S, I
        and downsampled to the spec's sub-image size.
        """
        tile_w, tile_h = self.footprint_pixels()
        cx, cy = self.boresight_scene()
        x0 = cx - spec.cols * tile_w / 2.0
        y0 = cy - spec.rows * tile_h / 2.0
        log = PointingLog()
        grids: dict[str, list[list[Plane]]] = {"h": [], "s": [], "i": []}
        for r in range(spec.rows):
            for ch in grids:
                grids[ch].append([])
            for c in range(spec.cols):
                rect = (x0 + c * tile_w, y0 + r * tile_h, x0 + (c + 1) * tile_w, y0 + (r + 1) * tile_h)
                tcx = (rect[0] + rect[2]) / 2.0
                tcy = (rect[1] + rect[3]) / 2.0
                pan, tilt = self.pose_toward(tcx, tcy)
                tile = self._acquire_rect(rect, log, "tile", pan, tilt)
                hsi = rgb_to_hsi(tile, levels=levels)
                for ch, plane in hsi.planes.items():
                    small = quantize(downsample(plane, spec.sub_width, spec.sub_height), levels)
                    grids[ch][r].append(small)
        geometry = MosaicGeometry(
            x0=x0,
            y0=y0,
            scale_x=tile_w / spec.sub_width,
            scale_y=tile_h / spec.sub_height,
            width=spec.cols * spec.sub_width,
            height=spec.rows * spec.sub_height,
        )
        return MosaicCapture(grids=grids, spec=spec, geometry=geometry, log=log)

    def acquire_chips(
        self, points: list[InterestPoint], geometry: MosaicGeometry, log: PointingLog | None = None
    ) -> list[RgbImage]:
        """Re-point at each interest point (in rank order) for a full-resolution chip."""
        chips = []
        for p in sorted(points, key=lambda q: q.rank):
            if not geometry.contains(p.x, p.y):
                raise ValueError(f"interest point ({p.x}, {p.y}) lies outside the mosaic")
            sx, sy = geometry.pixel_center_to_scene(p.x, p.y)
            pan, tilt = self.pose_toward(sx, sy)
            cam = replace(self, pan=pan, tilt=tilt)
            chips.append(cam.acquire_subimage(log, kind="chip"))
        return chips

    def approach(self, target, geometry: MosaicGeometry, new_distance: float) -> "VirtualCamera":
        """Move to a closer station whose boresight centers the target.

        ``target`` is an InterestPoint or (x, y) mosaic pixel pair interpreted
        through ``geometry``. The old and new MosaicGeometry objects link the
        two stations' mosaics in scene coordinates (mask memory uses that).
        """
        if not (0 < new_distance < self.distance):
            raise ValueError(f"approach needs 0 < new distance < {self.distance}, got {new_distance}")
        x, y = (target.x, target.y) if isinstance(target, InterestPoint) else target
        sx, sy = geometry.pixel_center_to_scene(int(x), int(y))
        moved = replace(self, distance=new_distance)
        pan, tilt = moved.pose_toward(sx, sy)
        return replace(moved, pan=pan, tilt=tilt)

    def set_zoom(self, zoom: float) -> "VirtualCamera":
        """Change magnification; the footprint shrinks by exactly 1/zoom."""
        return replace(self, zoom=zoom)

    def pose_dict(self) -> dict:
        return {
            "distance": self.distance,
            "pan": self.pan,
            "tilt": self.tilt,
            "zoom": self.zoom,
            "fov": self.fov,
            "base_fov": self.base_fov,
            "sensor": list(self.sensor),
        }


def fov_for_footprint(distance: float, footprint_width_m: float, zoom: float = 1.0) -> float:
    """Base horizontal fov (degrees) whose footprint at ``distance`` under ``zoom``
    spans the given width."""
    return math.degrees(2.0 * math.atan(footprint_width_m * zoom / (2.0 * distance)))


def mask_from_memory(
    coarse_interest_blur: np.ndarray,
    coarse_geometry: MosaicGeometry,
    fine_geometry: MosaicGeometry,
    low_weight: float = 0.1,
    threshold_fraction: float = 0.25,
) -> np.ndarray:
    """Weight map deemphasizing fine-mosaic pixels that were low-interest at coarse scale.

    Each fine pixel's center maps through scene coordinates onto its coarse
    ancestor pixel. Ancestors whose blurred coarse interest falls strictly below
    theta = vmin + threshold_fraction * (vmax - vmin) get ``low_weight``; all
    others (and pixels the coarse mosaic never saw) get weight 1. A uniform
    coarse map therefore masks nothing.
    """
    coarse = np.asarray(coarse_interest_blur, np.float64)
    if coarse.shape != (coarse_geometry.height, coarse_geometry.width):
        raise ValueError("coarse interest map does not match its geometry")
    if not (0.0 <= low_weight <= 1.0):
        raise ValueError("low_weight must lie in [0, 1]")
    vmin, vmax = float(coarse.min()), float(coarse.max())
    theta = vmin + threshold_fraction * (vmax - vmin)

    fy, fx = np.mgrid[0 : fine_geometry.height, 0 : fine_geometry.width]
    sx = fine_geometry.x0 + (fx + 0.5) * fine_geometry.scale_x
    sy = fine_geometry.y0 + (fy + 0.5) * fine_geometry.scale_y
    cx = np.floor((sx - coarse_geometry.x0) / coarse_geometry.scale_x).astype(np.int64)
    cy = np.floor((sy - coarse_geometry.y0) / coarse_geometry.scale_y).astype(np.int64)
    seen = (cx >= 0) & (cx < coarse_geometry.width) & (cy >= 0) & (cy < coarse_geometry.height)
    if not seen.any():
        raise ValueError("fine mosaic does not overlap the coarse mosaic")

    ancestor = coarse[np.clip(cy, 0, coarse_geometry.height - 1), np.clip(cx, 0, coarse_geometry.width - 1)]
    mask = np.ones(sx.shape, np.float64)
    mask[seen & (ancestor < theta)] = low_weight
    return mask
