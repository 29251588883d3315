import math

import numpy as np
import pytest

from conftest import random_norm_box
from mslkit.dataset.augment import AugmentSpec, augment_noise, augment_rotate, resize_with_boxes
from mslkit.geometry import NormBox, norm_to_pixel


def rotate_corners_oracle(nb: NormBox, angle_deg: float, w: int, h: int):
    """Rotate the box's 4 pixel corners by the 2x2 rotation matrix."""
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    x1, y1 = (nb.cx - nb.w / 2) * w, (nb.cy - nb.h / 2) * h
    x2, y2 = (nb.cx + nb.w / 2) * w, (nb.cy + nb.h / 2) * h
    rotated = []
    for x, y in ((x1, y1), (x2, y1), (x2, y2), (x1, y2)):
        dx, dy = x - w / 2, y - h / 2
        rotated.append((c * dx + s * dy + w / 2, -s * dx + c * dy + h / 2))
    return rotated


def hull_of(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), min(ys), max(xs), max(ys)


class TestNoise:
    def test_zero_fraction_is_identity(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        out = augment_noise(img, 0.0, seed=1)
        assert np.array_equal(out, img)
        assert out is not img

    def test_exact_pixel_count(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(100, 100, 3), dtype=np.uint8)
        out = augment_noise(img, 0.05, seed=7)
        changed = (out != img).any(axis=2).sum()
        assert changed == 500

    def test_exact_count_on_all_black(self):
        img = np.zeros((60, 40, 3), dtype=np.uint8)
        out = augment_noise(img, 0.1, seed=3)
        assert (out != img).any(axis=2).sum() == round(0.1 * 60 * 40)

    def test_exact_count_on_all_white_grayscale(self):
        img = np.full((50, 50), 255, dtype=np.uint8)
        out = augment_noise(img, 0.2, seed=9)
        assert (out != img).sum() == round(0.2 * 50 * 50)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, size=(64, 48, 3), dtype=np.uint8)
        a = augment_noise(img, 0.05, seed=11)
        b = augment_noise(img, 0.05, seed=11)
        c = augment_noise(img, 0.05, seed=12)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_noised_pixels_are_pure(self):
        rng = np.random.default_rng(4)
        img = rng.integers(1, 255, size=(30, 30, 3), dtype=np.uint8)  # no pure pixels
        out = augment_noise(img, 0.1, seed=5)
        diff = (out != img).any(axis=2)
        noised = out[diff]
        assert set(np.unique(noised)) <= {0, 255}
        assert all(len(np.unique(px)) == 1 for px in noised)  # whole pixel, not channel


class TestRotate:
    def test_zero_angle_identity(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        boxes = [(0, NormBox(0.5, 0.5, 0.2, 0.1))]
        out_img, out_boxes = augment_rotate(img, boxes, 0.0)
        assert np.array_equal(out_img, img)
        assert out_boxes == boxes

    def test_centered_box_keeps_center_on_square_image(self):
        img = np.zeros((100, 100, 3), dtype=np.uint8)
        for angle in (-10, -3, 5, 10, 37):
            _, out = augment_rotate(img, [(0, NormBox(0.5, 0.5, 0.3, 0.3))], angle)
            assert len(out) == 1
            assert out[0][1].cx == pytest.approx(0.5, abs=1e-9)
            assert out[0][1].cy == pytest.approx(0.5, abs=1e-9)

    def test_hull_matches_corner_oracle(self):
        img = np.zeros((256, 432, 3), dtype=np.uint8)
        nb = NormBox(0.5, 0.5, 0.2, 0.1)
        _, out = augment_rotate(img, [(3, nb)], 10.0)
        assert len(out) == 1 and out[0][0] == 3
        got = norm_to_pixel(out[0][1], 432, 256)
        ex1, ey1, ex2, ey2 = hull_of(rotate_corners_oracle(nb, 10.0, 432, 256))
        assert got.x1 == pytest.approx(max(ex1, 0), abs=1e-6)
        assert got.y1 == pytest.approx(max(ey1, 0), abs=1e-6)
        assert got.x2 == pytest.approx(min(ex2, 432), abs=1e-6)
        assert got.y2 == pytest.approx(min(ey2, 256), abs=1e-6)

    def test_hull_contains_inframe_rotated_corners(self):
        rng = np.random.default_rng(21)
        img = np.zeros((128, 160, 3), dtype=np.uint8)
        checked = 0
        for _ in range(400):
            nb = random_norm_box(rng)
            angle = rng.uniform(-45, 45)
            _, out = augment_rotate(img, [(0, nb)], angle)
            if not out:
                continue
            hull = norm_to_pixel(out[0][1], 160, 128)
            for x, y in rotate_corners_oracle(nb, angle, 160, 128):
                if 0 <= x <= 160 and 0 <= y <= 128:
                    assert hull.x1 - 1e-6 <= x <= hull.x2 + 1e-6
                    assert hull.y1 - 1e-6 <= y <= hull.y2 + 1e-6
                    checked += 1
        assert checked > 100

    def test_boxes_stay_normalized(self):
        rng = np.random.default_rng(22)
        img = np.zeros((96, 96, 3), dtype=np.uint8)
        for _ in range(200):
            nb = random_norm_box(rng, margin=0.0)
            _, out = augment_rotate(img, [(0, nb)], rng.uniform(-45, 45))
            for _, b in out:
                assert 0 <= b.cx - b.w / 2 and b.cx + b.w / 2 <= 1 + 1e-9
                assert 0 <= b.cy - b.h / 2 and b.cy + b.h / 2 <= 1 + 1e-9
                assert b.w > 0 and b.h > 0

    def test_sliver_boxes_dropped(self):
        img = np.zeros((100, 100, 3), dtype=np.uint8)
        # small box near the top-left corner swings out of frame at 45 degrees
        nb = NormBox(0.08, 0.08, 0.1, 0.1)
        _, out = augment_rotate(img, [(0, nb), (1, NormBox(0.5, 0.5, 0.2, 0.2))], 45.0)
        assert [c for c, _ in out] == [1]


class TestResize:
    def test_boxes_unchanged(self):
        rng = np.random.default_rng(5)
        img = rng.integers(0, 256, size=(1080, 1920, 3), dtype=np.uint8)
        boxes = [(1, NormBox(0.4, 0.6, 0.2, 0.2))]
        out_img, out_boxes = resize_with_boxes(img, boxes, 432, 256)
        assert out_img.shape == (256, 432, 3)
        assert out_boxes == boxes

    def test_already_target_size(self):
        rng = np.random.default_rng(6)
        img = rng.integers(0, 256, size=(256, 432, 3), dtype=np.uint8)
        out_img, _ = resize_with_boxes(img, [], 432, 256)
        assert np.array_equal(out_img, img)

    def test_pixel_corner_mapping(self):
        got = norm_to_pixel(NormBox(0.5, 0.5, 0.5, 0.5), 432, 256)
        assert (got.x1, got.y1, got.x2, got.y2) == (108, 64, 324, 192)


class TestAugmentSpec:
    def test_defaults(self):
        spec = AugmentSpec()
        assert spec.noise_fraction == 0.05
        assert spec.rotation_degrees == 10.0
        assert (spec.target_w, spec.target_h) == (432, 256)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            AugmentSpec(noise_fraction=1.5)
        with pytest.raises(ValueError):
            AugmentSpec(rotation_degrees=60)
