import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldscout.interest import (
    RANK_COLORS,
    InterestPoint,
    blur_interest,
    interest_sum,
    top_interest_points,
    uncommon_map,
)
from fieldscout.pipeline import MosaicAnalyzer
from fieldscout.segmentation import SegmentationMap

from oracles import elementwise_sum, naive_blur, uncommonness_by_rank


def seg_map_from_areas(areas: dict[int, int], width=None):
    chunks = [np.full(a, k, np.int32) for k, a in areas.items()]
    labels = np.concatenate(chunks)[None, :]
    rank = tuple(sorted(areas, key=lambda k: (-areas[k], k)))
    return SegmentationMap(labels=labels, class_areas=areas, rank=rank)


class TestUncommonMap:
    def test_single_class_is_all_ones(self):
        m = seg_map_from_areas({1: 12})
        assert (uncommon_map(m) == 1).all()

    def test_nested_regions_concept(self):
        # big > mid > small areas get uncommonness 1 / 2 / 3
        labels = np.full((30, 40), 1, np.int32)
        labels[5:20, 5:25] = 2
        labels[8:14, 8:14] = 3
        areas = {k: int((labels == k).sum()) for k in (1, 2, 3)}
        m = SegmentationMap(labels=labels, class_areas=areas, rank=(1, 2, 3))
        u = uncommon_map(m)
        assert u[0, 0] == 1
        assert u[6, 6] == 2
        assert u[10, 10] == 3

    def test_eight_halving_classes_match_rank_oracle(self):
        areas = {k: 8000 // (2 ** (k - 1)) for k in range(1, 9)}
        m = seg_map_from_areas(areas)
        expect = uncommonness_by_rank(areas)
        u = uncommon_map(m)
        for k, want in expect.items():
            assert (u[m.labels == k] == want).all()

    def test_label_zero_pixels_stay_zero(self):
        labels = np.array([[0, 1, 1, 0]], np.int32)
        m = SegmentationMap(labels=labels, class_areas={1: 2}, rank=(1,))
        assert list(uncommon_map(m)[0]) == [0, 1, 1, 0]

    @given(st.lists(st.integers(1, 500), min_size=2, max_size=8, unique=True))
    @settings(max_examples=40, deadline=None)
    def test_smaller_area_never_less_uncommon(self, area_list):
        areas = {i + 1: a for i, a in enumerate(area_list)}
        m = seg_map_from_areas(areas)
        u = uncommon_map(m)
        vals = {k: int(u[m.labels == k][0]) for k in areas}
        for a in areas:
            for b in areas:
                if areas[a] > areas[b]:
                    assert vals[a] < vals[b]


class TestInterestSum:
    def test_three_ones(self):
        ones = np.ones((4, 4), np.int32)
        assert (interest_sum(ones, ones, ones) == 3).all()

    def test_zero_is_identity(self):
        z = np.zeros((3, 5), np.int32)
        m = np.arange(15, dtype=np.int32).reshape(3, 5) % 9
        assert np.array_equal(interest_sum(z, m, m), 2 * m)

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(8)
        maps = [rng.integers(0, 9, (32, 32)) for _ in range(3)]
        got = interest_sum(*maps)
        want = np.array(elementwise_sum(*[m.tolist() for m in maps]))
        assert np.array_equal(got, want)

    def test_commutes_under_permutation(self):
        rng = np.random.default_rng(1)
        a, b, c = (rng.integers(0, 9, (6, 6)) for _ in range(3))
        assert np.array_equal(interest_sum(a, b, c), interest_sum(c, a, b))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            interest_sum(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


class TestBlurInterest:
    def test_preserves_constants(self):
        m = np.full((40, 50), 7.0)
        out = blur_interest(m, width=10)
        assert np.allclose(out, 7.0, atol=1e-9)

    def test_impulse_response_is_monotone_kernel(self):
        m = np.zeros((64, 64))
        m[32, 32] = 1.0
        out = blur_interest(m, width=10)
        assert out.argmax() == 32 * 64 + 32
        row = out[32, 32:53]
        assert (np.diff(row) < 0).all()

    def test_matches_naive_convolution_oracle(self):
        rng = np.random.default_rng(77)
        m = np.zeros((24, 24))
        m[6, 6] = 1.0
        m[17, 15] = 2.0
        m += rng.uniform(0, 0.1, m.shape)
        width = 3
        got = blur_interest(m, width=width)
        want = np.array(naive_blur(m.tolist(), sigma=width / 2.0, radius=2 * width))
        assert np.allclose(got, want, atol=1e-9)

    def test_two_far_impulses_keep_two_maxima(self):
        m = np.zeros((30, 80))
        m[15, 20] = 1.0
        m[15, 60] = 1.0
        out = blur_interest(m, width=10)
        pts = top_interest_points(out, k=2, min_separation=20)
        assert {(p.x, p.y) for p in pts} == {(20, 15), (60, 15)}

    def test_mass_conserved_for_interior_maps(self):
        m = np.zeros((120, 120))
        m[40:80, 40:80] = 3.0
        out = blur_interest(m, width=10)
        assert abs(out.sum() - m.sum()) / m.sum() < 1e-3

    def test_argmax_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(101)
        m = rng.uniform(0, 5, (48, 48))
        a = blur_interest(m, width=6)
        b = blur_interest(m * 37.5, width=6)
        assert a.argmax() == b.argmax()


class TestTopInterestPoints:
    def gaussian_bump(self, shape, cy, cx, height, sigma=4.0):
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        return height * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma**2))

    def test_single_bump(self):
        m = self.gaussian_bump((50, 70), 25, 40, 5.0)
        pts = top_interest_points(m, k=3, min_separation=20)
        assert len(pts) == 1 or pts[0].rank == 1
        assert abs(pts[0].x - 40) <= 1 and abs(pts[0].y - 25) <= 1

    def test_three_bumps_ranked_by_height(self):
        m = (
            self.gaussian_bump((60, 120), 15, 20, 9.0)
            + self.gaussian_bump((60, 120), 40, 60, 6.0)
            + self.gaussian_bump((60, 120), 15, 100, 3.0)
        )
        pts = top_interest_points(m, k=3, min_separation=20)
        assert [p.rank for p in pts] == [1, 2, 3]
        assert (pts[0].x, pts[0].y) == (20, 15)
        assert (pts[1].x, pts[1].y) == (60, 40)
        assert (pts[2].x, pts[2].y) == (100, 15)
        assert pts[0].score >= pts[1].score >= pts[2].score

    def test_pairwise_separation_enforced(self):
        rng = np.random.default_rng(3)
        m = rng.uniform(0, 1, (80, 80))
        pts = top_interest_points(m, k=5, min_separation=15)
        for i, p in enumerate(pts):
            for q in pts[i + 1 :]:
                assert (p.x - q.x) ** 2 + (p.y - q.y) ** 2 > 15**2

    def test_deterministic_rerun(self):
        rng = np.random.default_rng(4)
        m = rng.uniform(0, 1, (40, 40))
        a = top_interest_points(m, k=3)
        b = top_interest_points(m, k=3)
        assert a == b

    def test_zero_map_returns_nothing(self):
        assert top_interest_points(np.zeros((10, 10)), k=3) == []

    def test_ties_resolve_to_smallest_y_then_x(self):
        m = np.zeros((9, 9))
        m[2, 7] = m[6, 1] = 5.0
        pts = top_interest_points(m, k=1, min_separation=2)
        assert (pts[0].x, pts[0].y) == (7, 2)

    def test_rank_colors(self):
        assert RANK_COLORS == {1: "green", 2: "blue", 3: "red"}
        assert InterestPoint(1, 2, 1, 9.0).color == "green"
        assert InterestPoint(1, 2, 3, 1.0).color == "red"


class TestMosaicAnalyzer:
    def nested_scene(self):
        img = np.full((108, 192, 3), 200, np.uint8)
        img[20:70, 20:90] = 120
        img[70:92, 130:152] = 40
        return img

    def test_nested_regions_rank_one_at_smallest(self):
        res = MosaicAnalyzer().fit().analyze(self.nested_scene())
        assert res.points, "expected at least one interest point"
        p = res.points[0]
        cx, cy = (130 + 152) / 2, (70 + 92) / 2
        assert abs(p.x - cx) <= 10 and abs(p.y - cy) <= 10

    def test_interest_raw_is_integer_and_bounded(self):
        res = MosaicAnalyzer().fit().analyze(self.nested_scene())
        assert res.interest_raw.dtype.kind == "i"
        assert res.interest_raw.max() <= 24

    def test_mask_downweights_interest(self):
        img = self.nested_scene()
        analyzer = MosaicAnalyzer().fit()
        free = analyzer.analyze(img)
        mask = np.full(free.interest_raw.shape, 0.1)
        masked = analyzer.analyze(img, mask=mask)
        assert (masked.interest_blur <= free.interest_blur + 1e-12).all()

    def test_predict_returns_coordinate_array(self):
        pts = MosaicAnalyzer(top_k=2).fit().predict(self.nested_scene())
        assert pts.shape[1] == 2
        assert pts.shape[0] <= 2

    def test_get_params_includes_chain_knobs(self):
        params = MosaicAnalyzer().get_params()
        for key in ("levels", "blur_width", "top_k", "peak_fraction"):
            assert key in params
