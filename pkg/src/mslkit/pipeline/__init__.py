"""Frame-stream inference: preprocess, backend, decode, captions, sinks."""

from mslkit.pipeline.backends import TensorFileBackend, TorchscriptBackend, load_backend
from mslkit.pipeline.captions import CaptionEvent, CaptionTracker
from mslkit.pipeline.preprocess import preprocess
from mslkit.pipeline.sources import DirectorySource, Frame, SingleImageSource
from mslkit.pipeline.stream import JsonlSink, StreamSummary, run_frame, run_stream
from mslkit.pipeline.tensorfile import read_tensorfile, write_tensorfile

__all__ = [
    "TensorFileBackend",
    "TorchscriptBackend",
    "load_backend",
    "CaptionEvent",
    "CaptionTracker",
    "preprocess",
    "DirectorySource",
    "Frame",
    "SingleImageSource",
    "JsonlSink",
    "StreamSummary",
    "run_frame",
    "run_stream",
    "read_tensorfile",
    "write_tensorfile",
]
