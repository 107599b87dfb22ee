"""Familiar-scene recognition in egocentric photo streams.

Pipeline: Gabor energy maps with surround inhibition feed trainable keypoint
filters (COSFIRE-style) configured from prototype patterns; per-frame filter
voting yields scene labels, which temporal smoothing and event segmentation
turn into a timeline; precision/recall/F-measure score the result.
"""

__version__ = "0.1.0"

from .bankio import load_bank, save_bank
from .cosfire import (
    ChannelCache,
    ConfigSpec,
    CosfireFilter,
    CosfireTuple,
    apply_filter,
    configure_filter,
    rotation_tolerant_apply,
)
from .errors import (
    BankFormatError,
    BankVersionError,
    ConfigurationFailedError,
    CorruptFilterError,
    InvalidInputError,
    InvalidKeypointError,
    InvalidParameterError,
    InvalidSequenceError,
    SceneFireError,
    UnsupportedImageError,
)
from .gabor import EnergyStack, GaborBank, GaborParams, bank_responses, gabor_energy, gabor_kernel
from .imaging import convolve2d, load_image, to_grayscale, weighted_max_blur
from .inhibition import InhibitionParams, surround_inhibition
from .metrics import EvalReport, SceneScore, evaluate_scene, score_from_counts, summary_report
from .scene import (
    UNKNOWN,
    FrameLabel,
    SceneBank,
    SceneDef,
    decide_label,
    filter_responds,
    label_frame,
    label_sequence,
)
from .timeline import EventSegment, SmoothingParams, fill_holes, segment_events

__all__ = [
    "__version__",
    "load_bank", "save_bank",
    "ChannelCache", "ConfigSpec", "CosfireFilter", "CosfireTuple",
    "apply_filter", "configure_filter", "rotation_tolerant_apply",
    "BankFormatError", "BankVersionError", "ConfigurationFailedError",
    "CorruptFilterError", "InvalidInputError", "InvalidKeypointError",
    "InvalidParameterError", "InvalidSequenceError", "SceneFireError",
    "UnsupportedImageError",
    "EnergyStack", "GaborBank", "GaborParams",
    "bank_responses", "gabor_energy", "gabor_kernel",
    "convolve2d", "load_image", "to_grayscale", "weighted_max_blur",
    "InhibitionParams", "surround_inhibition",
    "EvalReport", "SceneScore", "evaluate_scene", "score_from_counts", "summary_report",
    "UNKNOWN", "FrameLabel", "SceneBank", "SceneDef",
    "decide_label", "filter_responds", "label_frame", "label_sequence",
    "EventSegment", "SmoothingParams", "fill_holes", "segment_events",
]
