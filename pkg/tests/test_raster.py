import numpy as np
import pytest

from cvcpipe.errors import BoundsError, ShapeMismatchError
from cvcpipe.raster import (
    BinaryMask,
    CvcClass,
    GrayImage,
    PolylineAnnotation,
    ProbMap,
    connected_components,
    dilate,
    gaussian_blur,
    overlap_fraction,
    rasterize_polyline,
    threshold_map,
)

from oracles import dense_gaussian_blur, flood_fill_components, scan_rasterize, stamp_dilate


def random_mask(rng, h=32, w=32, p=0.2):
    return BinaryMask(rng.random((h, w)) < p)


class TestTypes:
    def test_grayimage_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.full((4, 4), 1.5))
        with pytest.raises(ValueError):
            GrayImage(np.array([[np.nan, 0.0], [0.0, 0.0]]))

    def test_probmap_shape_contract(self):
        with pytest.raises(ShapeMismatchError):
            ProbMap(np.zeros((0, 4)))

    def test_buffers_are_read_only(self):
        img = GrayImage(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            img.data[0, 0] = 1.0

    def test_polyline_needs_distinct_consecutive_points(self):
        with pytest.raises(ValueError):
            PolylineAnnotation(
                points=np.array([[1.0, 1.0], [1.0, 1.0]]),
                cvc_class=CvcClass.IJ,
                image_id="x",
            )


class TestDilate:
    def test_single_pixel_radius2_is_13_pixel_disk(self):
        m = np.zeros((21, 21), dtype=bool)
        m[10, 10] = True
        out = dilate(BinaryMask(m), 2)
        assert out.count() == 13

    def test_radius_zero_is_identity(self):
        rng = np.random.default_rng(0)
        m = random_mask(rng)
        assert np.array_equal(dilate(m, 0).data, m.data)

    def test_line_of_20_radius2_area_matches_stamping(self):
        m = np.zeros((20, 40), dtype=bool)
        m[10, 5:25] = True
        out = dilate(BinaryMask(m), 2)
        # frozen from the stamping oracle: 13 + 19 columns of 5
        assert out.count() == 108
        assert np.array_equal(out.data, stamp_dilate(m, 2))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_stamping_oracle_on_random_masks(self, seed):
        rng = np.random.default_rng(seed)
        m = random_mask(rng, p=0.1)
        radius = rng.choice([1, 2, 3, 2.5])
        assert np.array_equal(dilate(m, radius).data, stamp_dilate(m.data, radius))

    def test_monotone_in_mask(self):
        rng = np.random.default_rng(3)
        a = rng.random((32, 32)) < 0.1
        b = a | (rng.random((32, 32)) < 0.1)
        da = dilate(BinaryMask(a), 2).data
        db = dilate(BinaryMask(b), 2).data
        assert np.all(db[da])

    def test_composition_contained_in_single_dilation(self):
        rng = np.random.default_rng(4)
        m = random_mask(rng, p=0.05)
        twice = dilate(dilate(m, 2), 3).data
        once = dilate(m, 5).data
        assert np.all(once[twice])

    def test_output_contains_input(self):
        rng = np.random.default_rng(5)
        m = random_mask(rng, p=0.2)
        assert np.all(dilate(m, 1).data[m.data])


class TestGaussianBlur:
    def test_sigma_zero_is_identity(self):
        rng = np.random.default_rng(1)
        p = ProbMap(rng.random((16, 16)))
        assert np.array_equal(gaussian_blur(p, 0).data, p.data)

    def test_constant_preserved(self):
        p = ProbMap(np.full((16, 16), 0.5))
        out = gaussian_blur(p, 3.0)
        assert np.max(np.abs(out.data - 0.5)) < 1e-9

    def test_impulse_matches_dense_convolution(self):
        data = np.zeros((33, 33))
        data[16, 16] = 1.0
        out = gaussian_blur(ProbMap(data), 2.0)
        expect = dense_gaussian_blur(data, 2.0)
        assert np.max(np.abs(out.data - expect)) < 1e-9

    @pytest.mark.parametrize("seed,sigma", [(s, g) for s in range(4) for g in (0.7, 1.5, 3.0)])
    def test_matches_dense_oracle_on_random_maps(self, seed, sigma):
        rng = np.random.default_rng(seed)
        data = rng.random((24, 24))
        out = gaussian_blur(ProbMap(data), sigma)
        assert np.max(np.abs(out.data - dense_gaussian_blur(data, sigma))) < 1e-9

    def test_interior_impulse_mean_preserved(self):
        # kernel support (radius ceil(3 sigma) = 5) stays inside the image
        data = np.zeros((32, 32))
        data[15, 17] = 1.0
        out = gaussian_blur(ProbMap(data), 1.5)
        assert abs(out.data.mean() - data.mean()) < 1e-6

    def test_values_stay_in_unit_interval(self):
        rng = np.random.default_rng(9)
        out = gaussian_blur(ProbMap(rng.random((20, 20))), 2.0)
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0


def _polyline(points, cls=CvcClass.IJ, image_id="img"):
    return PolylineAnnotation(points=np.asarray(points, dtype=float), cvc_class=cls, image_id=image_id)


class TestRasterizePolyline:
    def test_horizontal_segment_thickness1(self):
        ann = _polyline([[2, 5], [12, 5]])
        out = rasterize_polyline(ann, 20, 10, 1)
        assert out.count() == 11
        assert np.all(out.data[5, 2:13])

    def test_thickness3_matches_distance_scan(self):
        ann = _polyline([[2, 5], [12, 5]])
        out = rasterize_polyline(ann, 20, 12, 3)
        expect = scan_rasterize(ann.points, 20, 12, 3)
        assert np.array_equal(out.data, expect)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_polylines_match_scan_oracle(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(2, 28, size=(4, 2))
        ann = _polyline(pts)
        thickness = float(rng.choice([1, 2, 3.5]))
        out = rasterize_polyline(ann, 30, 30, thickness)
        assert np.array_equal(out.data, scan_rasterize(pts, 30, 30, thickness))

    def test_out_of_bounds_point_rejected(self):
        ann = _polyline([[2, 5], [25, 5]])
        with pytest.raises(BoundsError):
            rasterize_polyline(ann, 20, 10, 1)

    def test_catheter_scale_footprint_below_one_percent(self):
        # a generous catheter-length trace (~1.4x the image diagonal) at
        # thickness 2 still covers less than 1% of a 512^2 frame
        pts = np.array(
            [[499.5, 120.5], [380.5, 150.5], [270.5, 190.5], [262.5, 330.5], [258.5, 480.5]]
        )
        ann = _polyline(pts)
        out = rasterize_polyline(ann, 512, 512, 2)
        assert out.count() / 512**2 < 0.01

    def test_single_polyline_is_one_component(self):
        rng = np.random.default_rng(11)
        pts = np.cumsum(rng.uniform(-6, 6, size=(6, 2)), axis=0) + 32
        ann = _polyline(np.clip(pts, 2, 62))
        out = rasterize_polyline(ann, 64, 64, 2)
        assert len(connected_components(out)) == 1


class TestConnectedComponents:
    def test_empty_mask(self):
        assert connected_components(BinaryMask(np.zeros((8, 8), dtype=bool))) == []

    def test_diagonal_pixels_are_one_component(self):
        m = np.zeros((4, 4), dtype=bool)
        m[1, 1] = m[2, 2] = True
        comps = connected_components(BinaryMask(m))
        assert len(comps) == 1
        assert comps[0].shape == (2, 2)

    def test_random_mask_matches_flood_fill(self):
        rng = np.random.default_rng(7)
        m = rng.random((32, 32)) < 0.3
        comps = connected_components(BinaryMask(m))
        got = {frozenset(map(tuple, c)) for c in comps}
        expect = set(flood_fill_components(m))
        assert got == expect

    @pytest.mark.parametrize("seed", range(6))
    def test_partition_property(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.random((24, 24)) < 0.25
        comps = connected_components(BinaryMask(m))
        total = sum(len(c) for c in comps)
        assert total == int(m.sum())
        keys = [(int(c[:, 0].min()), int(c[:, 1].min())) for c in comps]
        assert keys == sorted(keys)


class TestOverlapFraction:
    def _line_mask(self, shift=0):
        m = np.zeros((32, 32), dtype=bool)
        m[10 + shift, 4:28] = True
        return BinaryMask(m)

    def test_identical_masks_radius0(self):
        m = self._line_mask()
        assert overlap_fraction(m, m, 0) == 1.0

    def test_shift2_covered_by_radius2(self):
        assert overlap_fraction(self._line_mask(2), self._line_mask(), 2) == 1.0

    def test_shift6_not_covered_by_radius2(self):
        assert overlap_fraction(self._line_mask(6), self._line_mask(), 2) == 0.0

    def test_both_empty_is_one(self):
        e = BinaryMask(np.zeros((8, 8), dtype=bool))
        assert overlap_fraction(e, e, 3) == 1.0

    def test_empty_auto_nonempty_truth_is_zero(self):
        e = BinaryMask(np.zeros((32, 32), dtype=bool))
        assert overlap_fraction(e, self._line_mask(), 2) == 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            overlap_fraction(BinaryMask(np.zeros((4, 4), bool)), BinaryMask(np.zeros((4, 5), bool)), 1)

    def test_nondecreasing_in_radius(self):
        rng = np.random.default_rng(13)
        auto = BinaryMask(rng.random((32, 32)) < 0.15)
        truth = BinaryMask(rng.random((32, 32)) < 0.1)
        vals = [overlap_fraction(auto, truth, r) for r in (0, 1, 2, 3, 5)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_threshold_map():
    p = ProbMap(np.array([[0.2, 0.5], [0.51, 1.0]]))
    out = threshold_map(p, 0.5)
    assert out.data.tolist() == [[False, False], [True, True]]
