from collections import Counter

import pytest

from conftest import class_names, make_dataset, make_split_tree
from mslkit.dataset.corpus import dataset_stats, ingest_frames, split_dataset
from mslkit.dataset.manifest import list_split_images, load_manifest, save_manifest
from mslkit.errors import (
    ClassOutOfRangeError,
    CountMismatchError,
    EmptyDirectoryError,
    EmptyInputError,
    ManifestError,
    MissingKeyError,
    UnreadableError,
)
from mslkit.geometry import NormBox


class TestManifest:
    def test_load_ok(self, tmp_path):
        path = make_dataset(tmp_path, nc=3, images_per_class=2)
        m = load_manifest(path)
        assert m.nc == 3
        assert m.names == class_names(3)
        assert m.split_paths["train"].is_dir()
        assert m.root == tmp_path

    def test_count_mismatch(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("path: .\ntrain: t\nval: v\nnc: 20\nnames: [a, b]\n")
        with pytest.raises(CountMismatchError):
            load_manifest(f)

    def test_missing_val(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("path: .\ntrain: t\nnc: 1\nnames: [a]\n")
        with pytest.raises(MissingKeyError) as exc:
            load_manifest(f)
        assert exc.value.key == "val"

    def test_unreadable(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("just a string")
        with pytest.raises(UnreadableError):
            load_manifest(f)
        with pytest.raises(UnreadableError):
            load_manifest(tmp_path / "missing.yaml")

    def test_duplicate_names_rejected(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("path: .\ntrain: t\nval: v\nnames: [a, a]\n")
        with pytest.raises(ManifestError):
            load_manifest(f)

    def test_nc_defaults_to_names_length(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("path: .\ntrain: t\nval: v\nnames: [a, b, c]\n")
        assert load_manifest(f).nc == 3

    def test_names_index_mapping_form(self, tmp_path):
        f = tmp_path / "data.yaml"
        f.write_text("path: .\ntrain: t\nval: v\nnames:\n  0: a\n  1: b\n")
        assert load_manifest(f).names == ["a", "b"]

    def test_save_round_trip(self, tmp_path):
        save_manifest(
            tmp_path / "data.yaml",
            root=tmp_path,
            split_paths={"train": "images/train", "val": "images/val"},
            names=["x", "y"],
        )
        (tmp_path / "images" / "train").mkdir(parents=True)
        (tmp_path / "images" / "val").mkdir(parents=True)
        m = load_manifest(tmp_path / "data.yaml")
        assert m.nc == 2
        assert m.split_paths["train"] == tmp_path / "images" / "train"

    def test_list_file_split(self, tmp_path):
        imgs = make_split_tree(tmp_path, "pool", [[], []])
        listing = tmp_path / "train.txt"
        listing.write_text("".join(str(p.relative_to(tmp_path)) + "\n" for p in imgs))
        save_manifest(
            tmp_path / "data.yaml",
            root=tmp_path,
            split_paths={"train": "train.txt", "val": "train.txt"},
            names=["a"],
        )
        m = load_manifest(tmp_path / "data.yaml")
        assert list_split_images(m, "train") == imgs


class TestIngest:
    def test_stride_three_keeps_a_third(self, tmp_path):
        for i in range(300):
            (tmp_path / f"frame_{i:05d}.jpg").touch()
        assert len(ingest_frames(tmp_path, stride=3)) == 100

    def test_stride_one_keeps_all_sorted(self, tmp_path):
        names = ["c.jpg", "a.jpg", "b.jpg"]
        for n in names:
            (tmp_path / n).touch()
        got = ingest_frames(tmp_path, stride=1)
        assert [p.name for p in got] == ["a.jpg", "b.jpg", "c.jpg"]

    def test_stride_beyond_count(self, tmp_path):
        for i in range(5):
            (tmp_path / f"f{i}.png").touch()
        got = ingest_frames(tmp_path, stride=99)
        assert [p.name for p in got] == ["f0.png"]

    def test_empty_directory(self, tmp_path):
        (tmp_path / "notes.txt").touch()
        with pytest.raises(EmptyDirectoryError):
            ingest_frames(tmp_path)


class TestSplit:
    def test_80_20_0(self):
        train, val, test = split_dataset(list(range(100)), (0.8, 0.2, 0.0), seed=42)
        assert (len(train), len(val), len(test)) == (80, 20, 0)
        assert sorted(train + val + test) == list(range(100))

    def test_deterministic(self):
        a = split_dataset(list(range(50)), (0.6, 0.2, 0.2), seed=7)
        b = split_dataset(list(range(50)), (0.6, 0.2, 0.2), seed=7)
        c = split_dataset(list(range(50)), (0.6, 0.2, 0.2), seed=8)
        assert a == b
        assert a != c

    def test_stratified_within_one(self):
        items = [(c, i) for c in range(20) for i in range(295)]
        labels = [c for c, _ in items]
        train, val, test = split_dataset(items, (0.8, 0.2, 0.0), seed=1, labels=labels)
        assert len(train) + len(val) + len(test) == 5900
        train_counts = Counter(c for c, _ in train)
        val_counts = Counter(c for c, _ in val)
        for c in range(20):
            assert abs(train_counts[c] - 0.8 * 295) <= 1
            assert abs(val_counts[c] - 0.2 * 295) <= 1

    def test_bad_ratios(self):
        with pytest.raises(ValueError):
            split_dataset([1], (0.5, 0.2, 0.1), seed=0)

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            split_dataset([], (1.0, 0.0, 0.0), seed=0)


class TestStats:
    def test_counts_match_construction(self, tmp_path):
        manifest = make_dataset(tmp_path, nc=4, images_per_class=5, val_fraction=0.2)
        stats = dataset_stats(load_manifest(manifest))
        assert stats["total_images"] == 20
        assert stats["total_boxes"] == 20
        assert stats["unlabeled_images"] == 0
        assert stats["splits"] == {"train": 16, "val": 4}
        for name in class_names(4):
            assert stats["per_class"][name] == {"images": 5, "boxes": 5}

    def test_empty_dataset(self, tmp_path):
        make_split_tree(tmp_path, "train", [])
        make_split_tree(tmp_path, "val", [])
        save_manifest(
            tmp_path / "data.yaml",
            root=tmp_path,
            split_paths={"train": "images/train", "val": "images/val"},
            names=["a"],
        )
        stats = dataset_stats(load_manifest(tmp_path / "data.yaml"))
        assert stats["total_images"] == 0
        assert stats["total_boxes"] == 0
        assert stats["per_class"]["a"] == {"images": 0, "boxes": 0}

    def test_unlabeled_and_multibox(self, tmp_path):
        entries = [
            [(0, NormBox(0.5, 0.5, 0.2, 0.2)), (0, NormBox(0.3, 0.3, 0.1, 0.1))],
            [],
        ]
        make_split_tree(tmp_path, "train", entries)
        make_split_tree(tmp_path, "val", [])
        save_manifest(
            tmp_path / "data.yaml",
            root=tmp_path,
            split_paths={"train": "images/train", "val": "images/val"},
            names=["a"],
        )
        stats = dataset_stats(load_manifest(tmp_path / "data.yaml"))
        assert stats["total_images"] == 2
        assert stats["total_boxes"] == 2
        assert stats["unlabeled_images"] == 1
        assert stats["per_class"]["a"] == {"images": 1, "boxes": 2}

    def test_parse_error_carries_file_path(self, tmp_path):
        make_split_tree(tmp_path, "train", [[(0, NormBox(0.5, 0.5, 0.2, 0.2))]])
        make_split_tree(tmp_path, "val", [])
        bad = tmp_path / "labels" / "train" / "img_00000.txt"
        bad.write_text("9 0.5 0.5 0.1 0.1\n")  # class 9 with nc=1
        save_manifest(
            tmp_path / "data.yaml",
            root=tmp_path,
            split_paths={"train": "images/train", "val": "images/val"},
            names=["a"],
        )
        with pytest.raises(ClassOutOfRangeError) as exc:
            dataset_stats(load_manifest(tmp_path / "data.yaml"))
        assert "img_00000.txt" in str(exc.value)
