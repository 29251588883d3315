"""Drive frames through preprocess -> infer -> decode -> unmap, in order.

Decode work fans out over a thread pool; a single ordered collector
releases results strictly by frame index, so sink output is identical
for any worker count.
"""

from __future__ import annotations

import json
import logging
import statistics
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from mslkit.decode import (
    DecodeConfig,
    Detection,
    decode_pretransformed,
    decode_raw,
    make_grid,
    nms,
)
from mslkit.errors import BackendFailureError
from mslkit.geometry import unmap_box
from mslkit.pipeline.captions import CaptionEvent, CaptionTracker
from mslkit.pipeline.preprocess import preprocess
from mslkit.pipeline.sources import Frame

log = logging.getLogger(__name__)

STAGES = ("preprocess", "infer", "decode", "unmap")


@dataclass
class StreamSummary:
    frames: int = 0
    detections: int = 0
    events: int = 0
    wall_seconds: float = 0.0
    stage_ms: dict = field(default_factory=dict)

    @property
    def fps(self) -> float:
        return self.frames / self.wall_seconds if self.wall_seconds > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "detections": self.detections,
            "events": self.events,
            "fps": round(self.fps, 2),
            "stage_ms": self.stage_ms,
        }


class JsonlSink:
    """JSON-lines sink: one record per frame plus event records."""

    def __init__(self, stream: IO[str], names: list[str] | None = None):
        self.stream = stream
        self.names = names

    def _label(self, class_id: int) -> str:
        return self.names[class_id] if self.names else str(class_id)

    def write_frame(self, frame_index: int, detections: list[Detection]) -> None:
        record = {
            "frame": frame_index,
            "detections": [
                {
                    "box": [d.box.x1, d.box.y1, d.box.x2, d.box.y2],
                    "class": d.class_id,
                    "label": self._label(d.class_id),
                    "score": d.score,
                }
                for d in detections
            ],
        }
        self.stream.write(json.dumps(record) + "\n")

    def write_event(self, event: CaptionEvent) -> None:
        record = {
            "event": {
                "class": event.class_id,
                "label": event.label,
                "start_frame": event.start_frame,
                "end_frame": event.end_frame,
                "mean_score": event.mean_score,
            }
        }
        self.stream.write(json.dumps(record) + "\n")


class ListSink:
    """Collects records in memory; handy for tests."""

    def __init__(self):
        self.frames: list[tuple[int, list[Detection]]] = []
        self.events: list[CaptionEvent] = []

    def write_frame(self, frame_index, detections):
        self.frames.append((frame_index, detections))

    def write_event(self, event):
        self.events.append(event)


def _sort_key(d: Detection):
    return (-d.score, d.class_id, d.box.x1, d.box.y1, d.box.x2, d.box.y2)


def _process_frame(image: np.ndarray, backend, config: DecodeConfig, grid):
    times = {}
    t0 = time.perf_counter()
    tensor, meta = preprocess(image, backend.input_w, backend.input_h)
    t1 = time.perf_counter()
    output = backend.infer(tensor)
    t2 = time.perf_counter()
    if backend.mode == "raw":
        candidates = decode_raw(output, grid, config.conf_threshold)
    else:
        candidates = decode_pretransformed(output, config.conf_threshold)
    kept = nms(
        candidates,
        iou_threshold=config.nms_iou_threshold,
        class_aware=config.class_aware,
        max_detections=config.max_detections,
    )
    t3 = time.perf_counter()
    dets = sorted(
        (Detection(unmap_box(d.box, meta), d.class_id, d.score) for d in kept),
        key=_sort_key,
    )
    t4 = time.perf_counter()
    times["preprocess"] = (t1 - t0) * 1000
    times["infer"] = (t2 - t1) * 1000
    times["decode"] = (t3 - t2) * 1000
    times["unmap"] = (t4 - t3) * 1000
    return dets, times


def run_frame(image: np.ndarray, backend, config: DecodeConfig = DecodeConfig()) -> list[Detection]:
    """Detections for one frame, in source-pixel coordinates, best first."""
    grid = make_grid(backend.input_w, backend.input_h, backend.strides) if backend.mode == "raw" else None
    dets, _ = _process_frame(image, backend, config, grid)
    return dets


def run_stream(
    source: Iterable[Frame],
    backend,
    config: DecodeConfig = DecodeConfig(),
    sink=None,
    captions: CaptionTracker | None = None,
    workers: int = 1,
) -> StreamSummary:
    """Process every frame in index order; emit per-frame records and
    debounced caption events to the sink.

    Worker threads only run the pure per-frame computation; ordering,
    caption state, and the sink live in the collecting thread, so output
    is byte-identical for any worker count. Backends that are not
    thread-safe are serialized with a lock.
    """
    grid = make_grid(backend.input_w, backend.input_h, backend.strides) if backend.mode == "raw" else None
    infer_lock = None if getattr(backend, "thread_safe", False) else threading.Lock()

    def work(frame: Frame):
        try:
            if infer_lock is None:
                return _process_frame(frame.image, backend, config, grid)
            # lock the whole stage: backends may keep per-call scratch state
            with infer_lock:
                return _process_frame(frame.image, backend, config, grid)
        except Exception as e:  # surfaced by the collector with frame context
            raise BackendFailureError(str(e), frame.index) from e

    summary = StreamSummary()
    stage_samples: dict[str, list[float]] = {name: [] for name in STAGES}
    started = time.perf_counter()

    def collect(frame_index: int, result) -> None:
        dets, times = result
        for name in STAGES:
            stage_samples[name].append(times[name])
        summary.frames += 1
        summary.detections += len(dets)
        if sink is not None:
            sink.write_frame(frame_index, dets)
        if captions is not None:
            for event in captions.step(frame_index, dets):
                summary.events += 1
                if sink is not None:
                    sink.write_event(event)

    try:
        if workers <= 1:
            for frame in source:
                collect(frame.index, work(frame))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                pending = deque()
                frame_iter = iter(source)
                for frame in frame_iter:
                    pending.append((frame.index, pool.submit(work, frame)))
                    if len(pending) >= workers * 2:
                        index, future = pending.popleft()
                        collect(index, future.result())
                while pending:
                    index, future = pending.popleft()
                    collect(index, future.result())
    except BackendFailureError as e:
        log.error("stream aborted at frame %d: %s", e.frame_index, e)
        raise

    if captions is not None:
        for event in captions.flush():
            summary.events += 1
            if sink is not None:
                sink.write_event(event)

    summary.wall_seconds = time.perf_counter() - started
    summary.stage_ms = {
        name: {
            "mean": round(statistics.mean(samples), 3) if samples else 0.0,
            "median": round(statistics.median(samples), 3) if samples else 0.0,
        }
        for name, samples in stage_samples.items()
    }
    return summary
