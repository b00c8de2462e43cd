import numpy as np
import pytest
from PIL import Image

from fieldscout import io as fio
from fieldscout.imaging import Plane, RgbImage
from fieldscout.segmentation import build_cooccurrence, segment_plane


def random_rgb(seed=0, w=20, h=14):
    return RgbImage(np.random.default_rng(seed).integers(0, 256, (h, w, 3)).astype(np.uint8))


class TestRgbRoundTrips:
    def test_png(self, tmp_path):
        img = random_rgb()
        fio.save_rgb_png(img, tmp_path / "x.png")
        back = fio.load_rgb_png(tmp_path / "x.png")
        assert np.array_equal(back.pixels, img.pixels)

    def test_ppm(self, tmp_path):
        img = random_rgb(3)
        fio.save_ppm(img, tmp_path / "x.ppm")
        back = fio.load_ppm(tmp_path / "x.ppm")
        assert np.array_equal(back.pixels, img.pixels)

    def test_ppm_rejects_non_p6(self, tmp_path):
        (tmp_path / "x.ppm").write_bytes(b"P3\n1 1\n255\n0 0 0\n")
        with pytest.raises(ValueError):
            fio.load_ppm(tmp_path / "x.ppm")


class TestPlaneRoundTrips:
    def test_quantized_plane_exact_with_sidecar(self, tmp_path):
        vals = np.random.default_rng(1).integers(0, 64, (12, 18)).astype(np.int32)
        plane = Plane(vals, levels=64, cyclic=True)
        fio.save_plane_png(plane, tmp_path / "p.png")
        meta = fio.load_json(tmp_path / "p.json")
        assert meta["levels"] == 64 and meta["cyclic"] is True
        back = fio.load_plane_png(tmp_path / "p.png")
        assert back.levels == 64 and back.cyclic
        assert np.array_equal(back.values, vals)

    def test_real_plane_exact_via_npy_companion(self, tmp_path):
        vals = np.random.default_rng(2).uniform(0, 31, (9, 9))
        fio.save_plane_png(Plane(vals), tmp_path / "r.png")
        back = fio.load_plane_png(tmp_path / "r.png")
        assert np.array_equal(back.values, vals)

    def test_integer_map_scales_into_16_bits(self, tmp_path):
        vals = np.arange(24, dtype=np.int64).reshape(4, 6)
        fio.save_map_png(vals, tmp_path / "m.png")
        with Image.open(tmp_path / "m.png") as im:
            png = np.asarray(im, np.uint16)
        assert png.max() > 60000  # visible, not near-black
        assert np.array_equal(fio.load_map_png(tmp_path / "m.png"), vals)


class TestSegmentationPng:
    def test_palette_colors_follow_rank_order(self, tmp_path):
        vals = np.full((24, 24), 5, np.int32)
        vals[4:10, 4:20] = 40  # smaller class
        m = segment_plane(Plane(vals, levels=64))
        fio.save_segmentation_png(m, tmp_path / "seg.png")
        with Image.open(tmp_path / "seg.png") as im:
            rgb = np.asarray(im.convert("RGB"))
        largest = m.rank[0]
        ys, xs = np.nonzero(m.labels == largest)
        assert tuple(rgb[ys[0], xs[0]]) == (255, 0, 0)  # rank 1 renders red
        if m.n_classes > 1:
            ys2, xs2 = np.nonzero(m.labels == m.rank[1])
            assert tuple(rgb[ys2[0], xs2[0]]) == (0, 0, 255)  # rank 2 blue
        back = fio.load_segmentation_png(tmp_path / "seg.png")
        assert np.array_equal(back.labels, m.labels)
        assert back.class_areas == m.class_areas and back.rank == m.rank

    def test_unsegmented_renders_black(self, tmp_path):
        labels = np.array([[0, 1], [1, 1]], np.int32)
        from fieldscout.segmentation import SegmentationMap

        m = SegmentationMap(labels=labels, class_areas={1: 3}, rank=(1,))
        fio.save_segmentation_png(m, tmp_path / "seg.png")
        with Image.open(tmp_path / "seg.png") as im:
            rgb = np.asarray(im.convert("RGB"))
        assert tuple(rgb[0, 0]) == (0, 0, 0)


class TestHistogramCsv:
    def test_gxg_csv_dump(self, tmp_path):
        vals = np.random.default_rng(5).integers(0, 8, (10, 10)).astype(np.int32)
        hist = build_cooccurrence(Plane(vals, levels=8))
        fio.save_histogram_csv(hist, tmp_path / "h.csv")
        loaded = np.loadtxt(tmp_path / "h.csv", delimiter=",", dtype=np.int64)
        assert loaded.shape == (8, 8)
        assert np.array_equal(loaded, hist.counts)


class TestManifest:
    def test_hashes_every_file_and_changes_with_content(self, tmp_path):
        (tmp_path / "a.txt").write_text("one")
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "b.txt").write_text("two")
        m1 = fio.write_manifest(tmp_path, extra={"parameters": {"k": 1}})
        assert set(m1["files"]) == {"a.txt", "sub/b.txt"}
        assert m1["parameters"] == {"k": 1}
        (tmp_path / "a.txt").write_text("changed")
        m2 = fio.write_manifest(tmp_path)
        assert m1["files"]["a.txt"] != m2["files"]["a.txt"]
        assert m1["files"]["sub/b.txt"] == m2["files"]["sub/b.txt"]
