import math

import numpy as np
import pytest

from mslkit.geometry import (
    LetterboxMeta,
    NormBox,
    PixelBox,
    ciou,
    iou,
    letterbox_params,
    map_box,
    norm_to_pixel,
    pixel_to_norm,
    unmap_box,
)


def ciou_reference(a: PixelBox, b: PixelBox) -> float:
    """Straight-from-formula CIoU, written independently of production code."""
    ax1, ay1, ax2, ay2 = a.x1, a.y1, a.x2, a.y2
    bx1, by1, bx2, by2 = b.x1, b.y1, b.x2, b.y2
    iw = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    ih = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    i = inter / union if union > 0 else 0.0

    rho2 = ((ax1 + ax2) / 2 - (bx1 + bx2) / 2) ** 2 + ((ay1 + ay2) / 2 - (by1 + by2) / 2) ** 2
    c2 = (max(ax2, bx2) - min(ax1, bx1)) ** 2 + (max(ay2, by2) - min(ay1, by1)) ** 2
    v = (4 / math.pi**2) * (
        math.atan((ax2 - ax1) / (ay2 - ay1)) - math.atan((bx2 - bx1) / (by2 - by1))
    ) ** 2
    alpha = v / ((1 - i) + v) if ((1 - i) + v) > 0 else 0.0
    return i - rho2 / c2 - alpha * v


def raster_iou(a: PixelBox, b: PixelBox, extent: float, cells: int = 1000) -> float:
    """IoU by counting raster cell centers; independent of min/max arithmetic.

    Exact whenever box edges lie on cell boundaries (extent/cells lattice).
    """
    centers = (np.arange(cells) + 0.5) * (extent / cells)
    ax = (centers >= a.x1) & (centers <= a.x2)
    ay = (centers >= a.y1) & (centers <= a.y2)
    bx = (centers >= b.x1) & (centers <= b.x2)
    by = (centers >= b.y1) & (centers <= b.y2)
    # boxes are axis-aligned, so 2-D cell counts factor into per-axis counts
    area_a = ax.sum() * ay.sum()
    area_b = bx.sum() * by.sum()
    inter = (ax & bx).sum() * (ay & by).sum()
    union = area_a + area_b - inter
    return float(inter) / float(union) if union > 0 else 0.0


def random_lattice_boxes(rng, n, extent=1000):
    """Random integer-coordinate box pairs, aligned to the raster lattice."""
    pairs = []
    for _ in range(n):
        xs = np.sort(rng.integers(0, extent + 1, size=2))
        ys = np.sort(rng.integers(0, extent + 1, size=2))
        if xs[0] == xs[1]:
            xs[1] += 1
        if ys[0] == ys[1]:
            ys[1] += 1
        pairs.append(PixelBox(float(xs[0]), float(ys[0]), float(min(xs[1], extent)), float(min(ys[1], extent))))
    return pairs


class TestIou:
    def test_identical(self):
        a = PixelBox(0, 0, 2, 2)
        assert iou(a, a) == 1.0

    def test_disjoint(self):
        assert iou(PixelBox(0, 0, 1, 1), PixelBox(5, 5, 6, 6)) == 0.0

    def test_partial_overlap_exact(self):
        # 2x2 boxes offset by (1,1): inter 1, union 7
        got = iou(PixelBox(0, 0, 2, 2), PixelBox(1, 1, 3, 3))
        assert got == pytest.approx(1 / 7, abs=1e-12)
        assert raster_iou(PixelBox(0, 0, 2, 2), PixelBox(1, 1, 3, 3), extent=4.0) == pytest.approx(
            1 / 7, abs=1e-9
        )

    def test_degenerate_zero_area(self):
        assert iou(PixelBox(1, 1, 1, 1), PixelBox(0, 0, 2, 2)) == 0.0
        assert iou(PixelBox(1, 1, 1, 1), PixelBox(1, 1, 1, 1)) == 0.0

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(7)
        boxes = random_lattice_boxes(rng, 400)
        for a, b in zip(boxes[::2], boxes[1::2]):
            v = iou(a, b)
            assert v == iou(b, a)
            assert 0.0 <= v <= 1.0

    def test_raster_oracle_agreement(self):
        rng = np.random.default_rng(42)
        boxes = random_lattice_boxes(rng, 2000)
        for a, b in zip(boxes[::2], boxes[1::2]):
            assert abs(iou(a, b) - raster_iou(a, b, extent=1000.0)) < 1e-3


class TestCiou:
    def test_identical_is_exactly_one(self):
        a = PixelBox(3, 4, 10, 20)
        assert ciou(a, a) == 1.0

    def test_concentric_same_aspect_equals_iou(self):
        a = PixelBox(0, 0, 4, 4)
        b = PixelBox(1, 1, 3, 3)  # same center, same aspect ratio
        assert ciou(a, b) == pytest.approx(iou(a, b), abs=1e-12)

    def test_side_by_side_reference_value(self):
        a = PixelBox(0, 0, 2, 2)
        b = PixelBox(2, 0, 4, 2)
        ref = ciou_reference(a, b)
        assert ref == pytest.approx(-0.2, abs=1e-12)  # -rho^2/c^2 = -4/20, iou 0, v 0
        assert ciou(a, b) == pytest.approx(ref, abs=1e-12)

    def test_matches_reference_on_random_boxes(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            x1, y1 = rng.uniform(0, 80, size=2)
            a = PixelBox(x1, y1, x1 + rng.uniform(1, 40), y1 + rng.uniform(1, 40))
            x1, y1 = rng.uniform(0, 80, size=2)
            b = PixelBox(x1, y1, x1 + rng.uniform(1, 40), y1 + rng.uniform(1, 40))
            assert ciou(a, b) == pytest.approx(ciou_reference(a, b), abs=1e-12)
            assert ciou(a, b) <= iou(a, b) + 1e-12

    def test_at_most_one(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            boxes = random_lattice_boxes(rng, 2, extent=50)
            assert ciou(boxes[0], boxes[1]) <= 1.0


class TestNormPixelConversion:
    def test_full_image_box(self):
        got = norm_to_pixel(NormBox(0.5, 0.5, 1, 1), 432, 256)
        assert got == PixelBox(0, 0, 432, 256)

    def test_centered_half_box(self):
        got = norm_to_pixel(NormBox(0.5, 0.5, 0.5, 0.5), 100, 100)
        assert got == PixelBox(25, 25, 75, 75)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            cx, cy = rng.uniform(0.2, 0.8, size=2)
            w = rng.uniform(0.01, 2 * min(cx, 1 - cx))
            h = rng.uniform(0.01, 2 * min(cy, 1 - cy))
            nb = NormBox(cx, cy, w, h)
            back = pixel_to_norm(norm_to_pixel(nb, 432, 256), 432, 256)
            for field in ("cx", "cy", "w", "h"):
                assert getattr(back, field) == pytest.approx(getattr(nb, field), rel=1e-9, abs=1e-12)

    def test_pixel_to_norm_clamps(self):
        nb = pixel_to_norm(PixelBox(-10, -10, 50, 50), 100, 100)
        assert nb.cx - nb.w / 2 >= 0.0
        assert nb.cy - nb.h / 2 >= 0.0


class TestLetterbox:
    def test_identity(self):
        m = letterbox_params(640, 640, 640, 640)
        assert (m.scale, m.pad_x, m.pad_y) == (1.0, 0.0, 0.0)

    def test_wide_source(self):
        m = letterbox_params(1920, 1080, 640, 640)
        assert m.scale == pytest.approx(1 / 3)
        assert m.pad_x == 0.0
        assert m.pad_y == pytest.approx(140.0)

    def test_dataset_frame_to_model_input(self):
        m = letterbox_params(432, 256, 640, 640)
        assert m.scale == pytest.approx(640 / 432)
        assert m.pad_x == 0.0
        assert m.pad_y == pytest.approx((640 - 256 * 640 / 432) / 2)

    def test_unmap_identity_meta(self):
        m = letterbox_params(640, 640, 640, 640)
        b = PixelBox(10, 20, 30, 40)
        assert unmap_box(b, m) == b

    def test_unmap_inverts_letterbox(self):
        m = letterbox_params(1920, 1080, 640, 640)
        got = unmap_box(PixelBox(0, 140, 640, 500), m)
        assert got.x1 == pytest.approx(0, abs=1e-9)
        assert got.y1 == pytest.approx(0, abs=1e-9)
        assert got.x2 == pytest.approx(1920, abs=1e-9)
        assert got.y2 == pytest.approx(1080, abs=1e-9)

    def test_unmap_clamps_to_source(self):
        m = letterbox_params(1920, 1080, 640, 640)
        got = unmap_box(PixelBox(-50, 0, 700, 640), m)
        assert got.x1 >= 0 and got.y1 >= 0
        assert got.x2 <= 1920 and got.y2 <= 1080

    def test_map_then_unmap_identity(self):
        rng = np.random.default_rng(5)
        m = letterbox_params(1920, 1080, 640, 640)
        for _ in range(300):
            x1 = rng.uniform(0, 1800)
            y1 = rng.uniform(0, 1000)
            b = PixelBox(x1, y1, x1 + rng.uniform(1, 1920 - x1), y1 + rng.uniform(1, 1080 - y1))
            back = unmap_box(map_box(b, m), m)
            for field in ("x1", "y1", "x2", "y2"):
                assert getattr(back, field) == pytest.approx(getattr(b, field), abs=1e-6)
