import numpy as np
import pytest

from dhaar.detection import (
    Detection,
    DetectionWindow,
    composite_classify,
    detect,
    iou,
    merge_detections,
    required_support,
    skin_prescreen,
    sliding_windows,
    verify_adjacency,
    window_sides,
)
from dhaar.filters import FilterMask, TrainedClassifier
from dhaar.imaging import GrayImage, ImageVector


def classifier_with_theta(theta, dim=4):
    return TrainedClassifier(FilterMask(dim, 1, [0], [dim - 1]), theta=theta)


class TestCompositeClassify:
    def test_all_positive(self):
        x = ImageVector(np.array([0.0, 0.5, 0.5, 1.0]), 4, 1)
        cs = [classifier_with_theta(0.5)] * 3
        assert composite_classify(x, *cs) == 1

    def test_one_negative_vetoes(self):
        x = ImageVector(np.array([0.0, 0.5, 0.5, 1.0]), 4, 1)
        cs = [classifier_with_theta(0.5), classifier_with_theta(2.0),
              classifier_with_theta(0.5)]
        assert composite_classify(x, *cs) == -1

    def test_intersection_property(self, rng):
        cs = [classifier_with_theta(t) for t in (0.1, 0.3, -0.2)]
        xs = [ImageVector(rng.uniform(0, 1, 4), 4, 1) for _ in range(200)]
        composite = {i for i, x in enumerate(xs) if composite_classify(x, *cs) == 1}
        individual = [
            {i for i, x in enumerate(xs)
             if (x.values[3] - x.values[0]) > c.theta}
            for c in cs
        ]
        assert composite == individual[0] & individual[1] & individual[2]


class TestSlidingWindows:
    def test_single_window(self, rng):
        img = GrayImage(rng.uniform(0, 1, (64, 64)))
        ws = sliding_windows(img, 64, 64, 1.25, 0.5)
        assert len(ws) == 1 and ws[0].x == 0 and ws[0].side == 64

    def test_nine_windows(self, rng):
        img = GrayImage(rng.uniform(0, 1, (128, 128)))
        ws = sliding_windows(img, 64, 64, 1.25, 0.5)
        assert len(ws) == 9
        assert sorted({w.x for w in ws}) == [0, 32, 64]

    def test_too_small_image_empty(self, rng):
        img = GrayImage(rng.uniform(0, 1, (100, 100)))
        assert sliding_windows(img, 120, 200, 1.25, 0.1) == []

    def test_scale_progression(self):
        assert window_sides(48, 100, 1.25) == [48, 60, 75, 94]

    def test_edge_coverage(self, rng):
        img = GrayImage(rng.uniform(0, 1, (100, 100)))
        ws = sliding_windows(img, 64, 64, 1.25, 0.5)
        assert max(w.x for w in ws) == 36  # tail window reaches the far edge


class TestSkinPrescreen:
    def test_skin_pixel(self):
        rgb = np.array([[[200, 120, 90]]], dtype=np.uint8)
        assert skin_prescreen(rgb)[0, 0]

    def test_blue_pixel_rejected(self):
        rgb = np.array([[[0, 0, 255]]], dtype=np.uint8)
        assert not skin_prescreen(rgb)[0, 0]

    def test_grayscale_disables(self):
        assert skin_prescreen(None) is None


class TestVerifyAdjacency:
    def test_required_support(self):
        assert required_support(100) == 2
        assert required_support(16) == 1

    def test_isolated_positive_rejected(self):
        w = DetectionWindow(10, 10, 100)
        assert verify_adjacency([w], stride=2) == []

    def test_dense_block_interior_accepted(self):
        ws = [DetectionWindow(10 + 2 * i, 10 + 2 * j, 100)
              for i in range(5) for j in range(5)]
        out = verify_adjacency(ws, stride=2)
        accepted = {(d.x, d.y) for d in out}
        assert (14, 14) in accepted  # interior window sees 24 neighbors
        assert all(d.support >= required_support(100) for d in out)

    def test_output_subset_of_input(self):
        ws = [DetectionWindow(0, 0, 100), DetectionWindow(2, 0, 100),
              DetectionWindow(4, 0, 100)]
        out = verify_adjacency(ws, stride=2)
        assert {(d.x, d.y) for d in out} <= {(w.x, w.y) for w in ws}


class TestMergeDetections:
    def test_empty(self):
        assert merge_detections([]) == []

    def test_identical_boxes_collapse(self):
        a = Detection(0, 0, 64, 3)
        b = Detection(0, 0, 64, 2)
        out = merge_detections([a, b])
        assert out == [a]

    def test_disjoint_boxes_kept(self):
        a = Detection(0, 0, 64, 3)
        b = Detection(200, 200, 64, 2)
        assert sorted(merge_detections([a, b]), key=lambda d: d.x) == [a, b]

    def test_iou(self):
        a = Detection(0, 0, 64, 1)
        assert iou(a, a) == 1.0
        assert iou(a, Detection(64, 64, 64, 1)) == 0.0


class TestDetectPipeline:
    def test_empty_on_flat_image(self, detector_trio):
        img = GrayImage(np.full((96, 96), 0.5))
        assert detect(img, detector_trio, min_side=48, max_side=96) == []

    def test_min_side_validated(self, detector_trio):
        img = GrayImage(np.full((96, 96), 0.5))
        with pytest.raises(ValueError):
            detect(img, detector_trio, min_side=8)

    def test_composite_subset_invariant(self, detector_trio, rng):
        # any detection must be positive under every individual classifier
        from dhaar.synth import face_template

        canvas = rng.uniform(0, 1, (160, 160))
        canvas[48:112, 48:112] = face_template()
        img = GrayImage(np.clip(canvas, 0, 1))
        dets = detect(img, detector_trio, min_side=64, max_side=64,
                      stride_frac=0.05)
        assert len(dets) >= 1
        best = max(dets, key=lambda d: iou(d, Detection(48, 48, 64, 0)))
        assert iou(best, Detection(48, 48, 64, 0)) > 0.5
