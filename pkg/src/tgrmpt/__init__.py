"""Head-shoulder aided multi-person tracking toolkit.

Submodules:
    core        shared domain types and validation
    geometry    box overlap measures
    assignment  minimum-cost bipartite matching
    fusion      wb/hs detection pairing
    descriptor  concatenated appearance descriptors and gallery distances
    tracker     frame-by-frame association and track lifecycle
    metrics     MOTA, IDF1, HOTA, and TGRHOTA evaluation
    synth       deterministic scenario generation and scripted trackers
    io          file formats and parsers
    cli         command-line entry points
"""

from .core import (
    BoundingBox,
    Detection,
    Embedding,
    FusedObservation,
    Kind,
    MetricReport,
    Role,
    Track,
    TrackStatus,
    TrajectorySet,
    TPRecord,
    validate_trajectory_set,
)
from .tracker import INFINITE, TrackerConfig, TrackerState, run_sequence

__all__ = [
    "BoundingBox",
    "Detection",
    "Embedding",
    "FusedObservation",
    "Kind",
    "MetricReport",
    "Role",
    "Track",
    "TrackStatus",
    "TrajectorySet",
    "TPRecord",
    "validate_trajectory_set",
    "INFINITE",
    "TrackerConfig",
    "TrackerState",
    "run_sequence",
]

__version__ = "0.1.0"
