"""Temporal post-processing: hole filling and event aggregation.

Low-frame-rate streams leave 'unknown' holes inside an activity whenever the
pattern is briefly occluded; a sliding decision window fills a hole from its
neighbors, and maximal runs of one label become timed events.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime

from .errors import InvalidParameterError
from .scene import UNKNOWN, FrameLabel


@dataclass(frozen=True)
class SmoothingParams:
    """Window half-size: how many frames on each side weigh into a hole decision."""

    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class EventSegment:
    """A maximal run of consecutive frames sharing one scene label."""

    scene: str
    start: datetime
    end: datetime
    frame_ids: tuple[str, ...]

    @property
    def duration_seconds(self) -> float:
        return (self.end - self.start).total_seconds()


def fill_holes(labels: list[FrameLabel], params: SmoothingParams = SmoothingParams()) -> list[FrameLabel]:
    """Single pass of the sliding decision window over the original sequence.

    An 'unknown' frame at index i takes scene s when s appears at least once
    in the original labels on each side within distance k, and no other scene
    appears anywhere in the window.  Labelled frames are never overwritten,
    and decisions always read the original sequence, so one pass is
    reproducible regardless of hole layout.  Frames at the boundary with an
    empty side are never filled.
    """
    k = params.k
    original = [fl.label for fl in labels]
    out: list[FrameLabel] = []
    for i, fl in enumerate(labels):
        if fl.label != UNKNOWN:
            out.append(fl)
            continue
        left = original[max(0, i - k) : i]
        right = original[i + 1 : i + 1 + k]
        window_scenes = {lab for lab in left + right if lab != UNKNOWN}
        if len(window_scenes) == 1:
            scene = next(iter(window_scenes))
            if scene in left and scene in right:
                out.append(replace(fl, label=scene))
                continue
        out.append(fl)
    return out


def segment_events(labels: list[FrameLabel]) -> list[EventSegment]:
    """Group maximal runs of identical non-'unknown' labels into timed events.

    Event duration is last minus first frame timestamp of the run; at the
    2-frames-per-minute rates these streams have, that underestimates the
    stay by at most one sampling interval.
    """
    events: list[EventSegment] = []
    run: list[FrameLabel] = []

    def close_run():
        if run:
            events.append(
                EventSegment(
                    scene=run[0].label,
                    start=run[0].timestamp,
                    end=run[-1].timestamp,
                    frame_ids=tuple(fl.frame_id for fl in run),
                )
            )
            run.clear()

    for fl in labels:
        if fl.label == UNKNOWN:
            close_run()
        elif run and fl.label == run[-1].label:
            run.append(fl)
        else:
            close_run()
            run.append(fl)
    close_run()
    return events
