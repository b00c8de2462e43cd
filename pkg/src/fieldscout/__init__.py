"""fieldscout: uncommonness-driven science-target scouting.

The analysis core (co-occurrence segmentation into area-ranked classes,
uncommon maps, the blurred interest map and its ranked peaks) is exposed as
sklearn-style estimators; a virtual pan-tilt-zoom camera and a session state
machine drive it over large scenes, headlessly or with a human in the loop.
"""

from .camera import (
    MosaicGeometry,
    PointingLog,
    SourceScene,
    VirtualCamera,
    fov_for_footprint,
    mask_from_memory,
)
from .imaging import (
    HsiImage,
    MosaicSpec,
    Plane,
    RgbImage,
    butt_mosaic,
    downsample,
    quantize,
    rgb_to_hsi,
)
from .interest import (
    InterestPoint,
    RANK_COLORS,
    blur_interest,
    interest_sum,
    top_interest_points,
    uncommon_map,
)
from .pipeline import AnalysisResult, MosaicAnalyzer
from .segmentation import (
    CooccurrenceHistogram,
    CooccurrenceSegmenter,
    SegmentationMap,
    build_cooccurrence,
    rank_classes,
    segment_plane,
)
from .session import Session, SessionConfig, SessionStateError, SessionStep, replay_session

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "CooccurrenceHistogram",
    "CooccurrenceSegmenter",
    "HsiImage",
    "InterestPoint",
    "MosaicAnalyzer",
    "MosaicGeometry",
    "MosaicSpec",
    "Plane",
    "PointingLog",
    "RANK_COLORS",
    "RgbImage",
    "SegmentationMap",
    "Session",
    "SessionConfig",
    "SessionStateError",
    "SessionStep",
    "SourceScene",
    "VirtualCamera",
    "blur_interest",
    "build_cooccurrence",
    "butt_mosaic",
    "downsample",
    "fov_for_footprint",
    "interest_sum",
    "mask_from_memory",
    "quantize",
    "rank_classes",
    "replay_session",
    "rgb_to_hsi",
    "segment_plane",
    "top_interest_points",
    "uncommon_map",
]
