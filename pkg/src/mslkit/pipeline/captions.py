"""Debounced caption events from per-frame detections.

A class's caption opens once it is present in at least `hits` of the last
`window` frames and closes when presence falls below hits/2; the event
spans open to close and carries the mean of the per-frame best scores
observed while open.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from mslkit.decode import Detection


@dataclass(frozen=True)
class CaptionEvent:
    class_id: int
    label: str
    start_frame: int
    end_frame: int
    mean_score: float


class _ClassState:
    __slots__ = ("history", "open", "start_frame", "score_sum", "score_count")

    def __init__(self, window: int):
        self.history = deque(maxlen=window)
        self.open = False
        self.start_frame = 0
        self.score_sum = 0.0
        self.score_count = 0


class CaptionTracker:
    def __init__(
        self,
        nc: int,
        names: list[str] | None = None,
        window: int = 15,
        hits: int = 10,
        min_score: float = 0.0,
    ):
        if not window >= hits >= 1:
            raise ValueError(f"need window >= hits >= 1, got window={window} hits={hits}")
        self.nc = nc
        self.names = names
        self.window = window
        self.hits = hits
        self.min_score = min_score
        self._states = [_ClassState(window) for _ in range(nc)]
        self.last_frame: int | None = None

    def _label(self, class_id: int) -> str:
        return self.names[class_id] if self.names else str(class_id)

    def step(self, frame_index: int, detections: list[Detection]) -> list[CaptionEvent]:
        """Advance one frame; returns caption events closed at this frame."""
        self.last_frame = frame_index
        best: dict[int, float] = {}
        for d in detections:
            if d.score >= self.min_score and d.class_id < self.nc:
                best[d.class_id] = max(best.get(d.class_id, 0.0), d.score)

        events: list[CaptionEvent] = []
        for class_id, state in enumerate(self._states):
            present = class_id in best
            state.history.append(present)
            count = sum(state.history)
            if not state.open:
                if count >= self.hits:
                    state.open = True
                    state.start_frame = frame_index
                    state.score_sum = 0.0
                    state.score_count = 0
            if state.open and present:
                state.score_sum += best[class_id]
                state.score_count += 1
            if state.open and count < self.hits / 2:
                events.append(self._close(class_id, state, frame_index))
        return events

    def flush(self) -> list[CaptionEvent]:
        """Force-close all open captions at the last processed frame."""
        if self.last_frame is None:
            return []
        return [
            self._close(class_id, state, self.last_frame)
            for class_id, state in enumerate(self._states)
            if state.open
        ]

    def _close(self, class_id: int, state: _ClassState, end_frame: int) -> CaptionEvent:
        mean = state.score_sum / state.score_count if state.score_count else 0.0
        state.open = False
        return CaptionEvent(
            class_id=class_id,
            label=self._label(class_id),
            start_frame=state.start_frame,
            end_frame=end_frame,
            mean_score=mean,
        )
