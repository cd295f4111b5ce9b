"""Automatic detection of interictal epileptiform discharges in multi-channel EEG.

The detector runs four stages: multi-scale CWT candidate selection
(:mod:`.detector`), half-wave feature extraction (:mod:`.mimetic`), Mamdani
fuzzy scoring (:mod:`.fuzzy`) and rule-based false-positive rejection
(:mod:`.postclass`).  :mod:`.evaluation` scores detections against expert
marks and :mod:`.synth` generates annotated synthetic recordings.
"""

from .evaluation import MatchCounts, RocCurve, match_events, roc_sweep, sensitivity, specificity
from .exceptions import (
    ConfigError,
    DegenerateEventError,
    EEGSpikeError,
    FormatError,
    InputError,
    IntegrityError,
    LabelError,
    PreconditionError,
    RangeError,
    ScaleError,
    UndefinedRateError,
)
from .pipeline import CandidateDetector, FuzzySpikeClassifier, MimeticFeatureExtractor, SpikeDetector
from .signal_io import AnnotationSet, Detection, DetectionList, Mark, Recording

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "CandidateDetector",
    "ConfigError",
    "DegenerateEventError",
    "Detection",
    "DetectionList",
    "EEGSpikeError",
    "FormatError",
    "FuzzySpikeClassifier",
    "InputError",
    "IntegrityError",
    "LabelError",
    "Mark",
    "MatchCounts",
    "MimeticFeatureExtractor",
    "PreconditionError",
    "RangeError",
    "Recording",
    "RocCurve",
    "ScaleError",
    "SpikeDetector",
    "UndefinedRateError",
    "match_events",
    "roc_sweep",
    "sensitivity",
    "specificity",
]
