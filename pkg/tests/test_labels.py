import numpy as np
import pytest

from conftest import random_norm_box
from mslkit.dataset.labels import label_path_for_image, parse_label_file, write_label_file
from mslkit.errors import ClassOutOfRangeError, CoordOutOfRangeError, MalformedLineError
from mslkit.geometry import NormBox


class TestParse:
    def test_single_line(self):
        got = parse_label_file("3 0.5 0.5 0.25 0.25", nc=20)
        assert got == [(3, NormBox(0.5, 0.5, 0.25, 0.25))]

    def test_empty_file_is_negative_sample(self):
        assert parse_label_file("", nc=20) == []
        assert parse_label_file("\n\n  \n", nc=20) == []

    def test_class_out_of_range(self):
        with pytest.raises(ClassOutOfRangeError) as exc:
            parse_label_file("25 0.5 0.5 0.1 0.1", nc=20)
        assert exc.value.line == 1

    def test_negative_class(self):
        with pytest.raises(ClassOutOfRangeError):
            parse_label_file("-1 0.5 0.5 0.1 0.1", nc=20)

    def test_wrong_token_count(self):
        with pytest.raises(MalformedLineError) as exc:
            parse_label_file("0 0.5 0.5 0.1", nc=20)
        assert exc.value.line == 1

    def test_non_numeric(self):
        with pytest.raises(MalformedLineError):
            parse_label_file("0 0.5 abc 0.1 0.1", nc=20)

    def test_non_integer_class(self):
        with pytest.raises(MalformedLineError):
            parse_label_file("1.5 0.5 0.5 0.1 0.1", nc=20)

    def test_coord_out_of_range_reports_line(self):
        text = "0 0.5 0.5 0.1 0.1\n1 0.5 1.5 0.1 0.1\n"
        with pytest.raises(CoordOutOfRangeError) as exc:
            parse_label_file(text, nc=20)
        assert exc.value.line == 2

    def test_error_path_attribution(self):
        with pytest.raises(MalformedLineError) as exc:
            parse_label_file("junk", nc=20)
        attributed = exc.value.at_path("labels/x.txt")
        assert "labels/x.txt" in str(attributed)
        assert attributed.line == 1


class TestWrite:
    def test_fixed_point_format(self):
        got = write_label_file([(0, NormBox(0.5, 0.5, 1, 1))])
        assert got == "0 0.500000 0.500000 1.000000 1.000000\n"

    def test_empty(self):
        assert write_label_file([]) == ""

    def test_round_trip_to_six_decimals(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            entries = [
                (int(rng.integers(0, 20)), random_norm_box(rng))
                for _ in range(rng.integers(0, 6))
            ]
            reparsed = parse_label_file(write_label_file(entries), nc=20)
            assert len(reparsed) == len(entries)
            for (c0, b0), (c1, b1) in zip(entries, reparsed):
                assert c0 == c1
                for f in ("cx", "cy", "w", "h"):
                    assert getattr(b1, f) == pytest.approx(getattr(b0, f), abs=5e-7)


def test_label_path_convention(tmp_path):
    img = tmp_path / "data" / "images" / "train" / "img_0.jpg"
    assert label_path_for_image(img) == tmp_path / "data" / "labels" / "train" / "img_0.txt"
    sibling = tmp_path / "frames" / "img_0.png"
    assert label_path_for_image(sibling) == tmp_path / "frames" / "img_0.txt"
