"""Serialization: rasters to PNG/PPM, planes and maps with JSON sidecars, manifests.

Quantized planes and integer maps go to 16-bit grayscale PNG with an integer
scale factor recorded in the sidecar, so they reload exactly and still render
visibly. Real-valued maps additionally keep a lossless .npy companion because
16-bit scaling alone cannot round-trip floats bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import Plane, RgbImage
from .interest import CLASS_RANK_COLORS
from .segmentation import CooccurrenceHistogram, SegmentationMap

U16_MAX = 65535


def dump_json(obj, path: str | Path) -> None:
    """Canonical JSON: sorted keys, 2-space indent, trailing newline."""
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def save_rgb_png(img: RgbImage | np.ndarray, path: str | Path) -> None:
    px = img.pixels if isinstance(img, RgbImage) else np.asarray(img, np.uint8)
    Image.fromarray(px, mode="RGB").save(path, format="PNG")


def load_rgb_png(path: str | Path) -> RgbImage:
    with Image.open(path) as im:
        return RgbImage(np.asarray(im.convert("RGB")))


def save_ppm(img: RgbImage, path: str | Path) -> None:
    """Binary (P6) PPM."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def load_ppm(path: str | Path) -> RgbImage:
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise ValueError(f"{path}: not a binary PPM")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    w, h, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise ValueError("only 8-bit PPM supported")
    px = np.frombuffer(data[pos : pos + w * h * 3], np.uint8).reshape(h, w, 3)
    return RgbImage(px.copy())


def load_image(path: str | Path) -> RgbImage:
    """PNG or binary PPM, by extension (anything else goes through Pillow)."""
    if str(path).lower().endswith(".ppm"):
        return load_ppm(path)
    return load_rgb_png(path)


def _sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def save_plane_png(plane: Plane, path: str | Path) -> None:
    """16-bit grayscale PNG plus sidecar recording quantization and scaling."""
    path = Path(path)
    if plane.quantized:
        scale = U16_MAX // max(1, plane.levels - 1)
        png = (plane.values.astype(np.int64) * scale).astype(np.uint16)
        meta = {"kind": "quantized", "levels": plane.levels, "cyclic": plane.cyclic, "scale": scale}
    else:
        vmin = float(plane.values.min())
        vmax = float(plane.values.max())
        span = vmax - vmin
        scaled = (plane.values - vmin) / span if span > 0 else np.zeros_like(plane.values)
        png = np.rint(scaled * U16_MAX).astype(np.uint16)
        meta = {"kind": "real", "vmin": vmin, "vmax": vmax, "cyclic": plane.cyclic}
        np.save(path.with_suffix(".npy"), plane.values)
    Image.fromarray(png).save(path, format="PNG")
    dump_json(meta, _sidecar_path(path))


def load_plane_png(path: str | Path) -> Plane:
    path = Path(path)
    meta = load_json(_sidecar_path(path))
    with Image.open(path) as im:
        png = np.asarray(im, np.uint16)
    if meta["kind"] == "quantized":
        vals = (png // meta["scale"]).astype(np.int32)
        return Plane(vals, levels=meta["levels"], cyclic=meta.get("cyclic", False))
    npy = path.with_suffix(".npy")
    if npy.exists():
        return Plane(np.load(npy), cyclic=meta.get("cyclic", False))
    span = meta["vmax"] - meta["vmin"]
    vals = png.astype(np.float64) / U16_MAX * span + meta["vmin"]
    return Plane(vals, cyclic=meta.get("cyclic", False))


def save_map_png(values: np.ndarray, path: str | Path) -> None:
    """Integer maps scale exactly into 16 bits; float maps also keep a .npy copy."""
    path = Path(path)
    arr = np.asarray(values)
    if arr.dtype.kind in "iu":
        vmax = int(arr.max(initial=0))
        scale = U16_MAX // max(1, vmax)
        png = (arr.astype(np.int64) * scale).astype(np.uint16)
        meta = {"kind": "integer", "scale": scale, "vmax": vmax}
    else:
        vmin, vmax = float(arr.min()), float(arr.max())
        span = vmax - vmin
        scaled = (arr - vmin) / span if span > 0 else np.zeros_like(arr)
        png = np.rint(scaled * U16_MAX).astype(np.uint16)
        meta = {"kind": "real", "vmin": vmin, "vmax": vmax}
        np.save(path.with_suffix(".npy"), arr)
    Image.fromarray(png).save(path, format="PNG")
    dump_json(meta, _sidecar_path(path))


def load_map_png(path: str | Path) -> np.ndarray:
    path = Path(path)
    meta = load_json(_sidecar_path(path))
    if meta["kind"] == "real":
        npy = path.with_suffix(".npy")
        if npy.exists():
            return np.load(npy)
        with Image.open(path) as im:
            png = np.asarray(im, np.uint16)
        return png.astype(np.float64) / U16_MAX * (meta["vmax"] - meta["vmin"]) + meta["vmin"]
    with Image.open(path) as im:
        png = np.asarray(im, np.uint16)
    return (png // meta["scale"]).astype(np.int64)


def save_segmentation_png(m: SegmentationMap, path: str | Path) -> None:
    """Indexed-color PNG: pixels hold class labels, the palette colors them by
    area rank (red for the largest class, then blue, purple, green, cyan,
    yellow, white, orange; black for unsegmented)."""
    path = Path(path)
    palette = [0, 0, 0] * 256
    for r, cls in enumerate(m.rank):
        rgb = CLASS_RANK_COLORS[r][1]
        palette[cls * 3 : cls * 3 + 3] = list(rgb)
    im = Image.fromarray(m.labels.astype(np.uint8), mode="P")
    im.putpalette(palette)
    im.save(path, format="PNG")
    dump_json(
        {"class_areas": {str(k): v for k, v in m.class_areas.items()}, "rank": list(m.rank)},
        _sidecar_path(path),
    )


def load_segmentation_png(path: str | Path) -> SegmentationMap:
    path = Path(path)
    meta = load_json(_sidecar_path(path))
    with Image.open(path) as im:
        labels = np.asarray(im, np.uint8).astype(np.int32)
    return SegmentationMap(
        labels=labels,
        class_areas={int(k): v for k, v in meta["class_areas"].items()},
        rank=tuple(meta["rank"]),
    )


def save_histogram_csv(hist: CooccurrenceHistogram, path: str | Path) -> None:
    np.savetxt(path, hist.counts, fmt="%d", delimiter=",")


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(directory: str | Path, extra: dict | None = None, skip: tuple[str, ...] = ()) -> dict:
    """Hash every file under ``directory`` (except the manifest itself) into manifest.json."""
    directory = Path(directory)
    files = {}
    for p in sorted(directory.rglob("*")):
        rel = p.relative_to(directory).as_posix()
        if p.is_dir() or rel == "manifest.json" or rel in skip:
            continue
        files[rel] = sha256_file(p)
    manifest = {"files": files, **(extra or {})}
    dump_json(manifest, directory / "manifest.json")
    return manifest
