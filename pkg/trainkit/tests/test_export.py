import json

import pytest
import torch

from trainkit.export import export
from trainkit.synth import generate_shapes_dataset
from trainkit.train import TrainSpec, train


@pytest.fixture(scope="module")
def toy_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("toy")
    manifest = generate_shapes_dataset(tmp / "ds", n_images=6, nc=2, seed=5)
    run = train(TrainSpec(data=str(manifest), epochs=2, out=str(tmp / "run")))
    return run


class TestExport:
    def test_bundle_contents_and_metadata(self, toy_run, tmp_path):
        bundle = export(toy_run, out_dir=tmp_path / "bundle")
        metadata = json.loads((bundle / "metadata.json").read_text())
        assert list(metadata) == ["mode", "reg_max", "nc", "strides", "input_w", "input_h", "names"]
        assert metadata["mode"] == "pretransformed"
        assert metadata["nc"] == len(metadata["names"]) == 2
        assert metadata["input_w"] % 32 == 0 and metadata["input_h"] % 32 == 0
        assert (bundle / "model.torchscript").is_file()
        assert (bundle / "results.csv").is_file()

    def test_traced_output_shape_matches_metadata(self, toy_run, tmp_path):
        bundle = export(toy_run, out_dir=tmp_path / "bundle")
        metadata = json.loads((bundle / "metadata.json").read_text())
        module = torch.jit.load(str(bundle / "model.torchscript"))
        x = torch.zeros(1, 3, metadata["input_h"], metadata["input_w"])
        with torch.no_grad():
            out = module(x)
        anchors = sum(
            (metadata["input_w"] // s) * (metadata["input_h"] // s) for s in metadata["strides"]
        )
        assert tuple(out.shape) == (1, 4 + metadata["nc"], anchors)
        assert float(out[0, 4:].min()) >= 0.0 and float(out[0, 4:].max()) <= 1.0

    def test_reexport_metadata_byte_identical(self, toy_run, tmp_path):
        a = export(toy_run, out_dir=tmp_path / "a")
        b = export(toy_run, out_dir=tmp_path / "b")
        assert (a / "metadata.json").read_bytes() == (b / "metadata.json").read_bytes()

    def test_raw_mode_export(self, toy_run, tmp_path):
        bundle = export(toy_run, mode="raw", out_dir=tmp_path / "raw")
        metadata = json.loads((bundle / "metadata.json").read_text())
        assert metadata["mode"] == "raw"
        module = torch.jit.load(str(bundle / "model.torchscript"))
        x = torch.zeros(1, 3, metadata["input_h"], metadata["input_w"])
        with torch.no_grad():
            out = module(x)
        assert len(out) == len(metadata["strides"])
        channels = 4 * metadata["reg_max"] + metadata["nc"]
        for level, s in zip(out, metadata["strides"]):
            assert tuple(level.shape) == (1, channels, metadata["input_h"] // s, metadata["input_w"] // s)

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            export(tmp_path)
