"""Frame labeling: per-filter significance tests and scene voting.

A frame gets the label of the scene with the most responding filters; count
ties fall back to the best normalized response, and exact ties (or no
responders at all) yield the distinguished 'unknown' label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .cosfire import ChannelCache, CosfireFilter, rotation_tolerant_apply
from .errors import (
    CorruptFilterError,
    InvalidParameterError,
    InvalidSequenceError,
)
from .gabor import GaborBank
from .imaging import GrayImage
from .inhibition import InhibitionParams

#: Reserved label for frames no scene claims.
UNKNOWN = "unknown"

#: Two normalized responses closer than this are an exact tie.
RESPONSE_TIE_EPS = 1e-9

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SceneDef:
    """One scene: its filters and the response fraction that counts as a vote."""

    name: str
    filters: tuple[CosfireFilter, ...]
    detection_threshold: float = 0.25

    def __post_init__(self):
        if not self.name or self.name == UNKNOWN:
            raise InvalidParameterError(f"scene name {self.name!r} is empty or reserved")
        if not self.filters:
            raise InvalidParameterError(f"scene {self.name!r} has no filters")
        if not (0 < self.detection_threshold <= 1):
            raise InvalidParameterError(
                f"detection_threshold must be in (0, 1], got {self.detection_threshold}"
            )
        for filt in self.filters:
            if filt.scene != self.name:
                raise InvalidParameterError(
                    f"filter {filt.name!r} belongs to scene {filt.scene!r}, "
                    f"not {self.name!r}"
                )


@dataclass(frozen=True)
class SceneBank:
    """Named scenes plus the Gabor bank and inhibition they were configured with."""

    scenes: tuple[SceneDef, ...]
    bank: GaborBank = field(default_factory=GaborBank)
    inhibition: InhibitionParams | None = None

    def __post_init__(self):
        names = [s.name for s in self.scenes]
        if len(set(names)) != len(names):
            raise InvalidParameterError(f"scene names must be unique, got {names}")

    def scene_names(self) -> list[str]:
        return [s.name for s in self.scenes]

    def filter_names(self) -> list[str]:
        return [f.name for s in self.scenes for f in s.filters]


@dataclass(frozen=True)
class FrameLabel:
    """Per-frame verdict with the evidence behind it."""

    frame_id: str
    timestamp: datetime
    label: str
    responses: dict[str, int]
    max_response: dict[str, float]


def filter_responds(
    image: GrayImage,
    filt: CosfireFilter,
    threshold_fraction: float,
    psis: list[float],
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
    cache: ChannelCache | None = None,
) -> tuple[bool, float]:
    """Peak response normalized by the filter's own prototype response.

    Returns (responds, normalized); the filter responds when the normalized
    peak reaches ``threshold_fraction``.
    """
    if not (0 < threshold_fraction <= 1):
        raise InvalidParameterError(
            f"threshold fraction must be in (0, 1], got {threshold_fraction}"
        )
    if filt.prototype_response <= 0:
        raise CorruptFilterError(
            f"filter {filt.name!r} has prototype_response {filt.prototype_response}; "
            "it was never configured"
        )
    response = rotation_tolerant_apply(image, filt, psis, bank, inhibition, cache=cache)
    normalized = float(response.max()) / filt.prototype_response
    return normalized >= threshold_fraction, normalized


def decide_label(counts: dict[str, int], maxes: dict[str, float]) -> str:
    """Voting rule on per-scene responder counts, pure so tests can inject counts.

    Strictly greatest count wins; a count tie goes to the greater best
    response; a response tie within RESPONSE_TIE_EPS, or no responders at
    all, yields 'unknown'.
    """
    top = max(counts.values(), default=0)
    if top <= 0:
        return UNKNOWN
    tied = [name for name, c in counts.items() if c == top]
    if len(tied) == 1:
        return tied[0]
    best = max(maxes.get(name, 0.0) for name in tied)
    leaders = [name for name in tied if best - maxes.get(name, 0.0) <= RESPONSE_TIE_EPS]
    if len(leaders) == 1:
        return leaders[0]
    return UNKNOWN


def label_frame(
    image: GrayImage,
    scene_bank: SceneBank,
    psis: list[float],
    frame_id: str = "",
    timestamp: datetime = EPOCH,
    cache: ChannelCache | None = None,
) -> FrameLabel:
    """Run every filter on the frame and vote on the scene label."""
    if cache is None:
        cache = ChannelCache(image, scene_bank.bank, scene_bank.inhibition)
    counts: dict[str, int] = {}
    maxes: dict[str, float] = {}
    for scene in scene_bank.scenes:
        count = 0
        best = 0.0
        for filt in scene.filters:
            responds, normalized = filter_responds(
                image, filt, scene.detection_threshold, psis,
                scene_bank.bank, scene_bank.inhibition, cache=cache,
            )
            if responds:
                count += 1
            best = max(best, normalized)
        counts[scene.name] = count
        maxes[scene.name] = best
    return FrameLabel(
        frame_id=frame_id,
        timestamp=timestamp,
        label=decide_label(counts, maxes),
        responses=counts,
        max_response=maxes,
    )


def label_sequence(
    frames: list[tuple[str, datetime, GrayImage]],
    scene_bank: SceneBank,
    psis: list[float],
) -> list[FrameLabel]:
    """Label frames in order; timestamps must be non-decreasing."""
    previous: datetime | None = None
    for frame_id, ts, _ in frames:
        if previous is not None and ts < previous:
            raise InvalidSequenceError(
                f"timestamps decrease at frame {frame_id!r} ({ts.isoformat()})"
            )
        previous = ts
    return [
        label_frame(image, scene_bank, psis, frame_id=frame_id, timestamp=ts)
        for frame_id, ts, image in frames
    ]
