"""Estimator-style wrappers around the four detection stages.

The stages chain as ``Recording -> CandidateSet -> FeatureTable -> scores``:

>>> from sklearn.pipeline import make_pipeline
>>> front = make_pipeline(CandidateDetector(k=3.0), MimeticFeatureExtractor())
>>> table = front.fit_transform(recording)                     # doctest: +SKIP
>>> FuzzySpikeClassifier().fit(table).predict(table)           # doctest: +SKIP

:class:`SpikeDetector` bundles all stages plus post-classification.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_feature_matrix, check_positive, check_recording, check_unit_interval
from .detector import CandidateEvent, WindowSpec, collect_candidates
from .fuzzy import EPILEPTIFORM_THRESHOLD, classify_batch, label_for, load_rulebase
from .mimetic import FEATURE_NAMES, ExtractedEvent, extract_events
from .postclass import ClassifiedEvent, apply_rejection_rules, parse_enabled, to_detection_list
from .signal_io import DETECTION_CLASSES, DetectionList, Recording
from .wavelet import build_wavelet_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSet:
    recording: Recording
    candidates: tuple[CandidateEvent, ...]
    wavelet: str = "db2"
    cascade_iterations: int = 10

    def __len__(self):
        return len(self.candidates)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Decomposed candidates and their ``(n, 9)`` feature matrix (rows in event order)."""

    recording: Recording
    events: tuple[ExtractedEvent, ...]
    features: np.ndarray

    def __len__(self):
        return len(self.events)

    def times_s(self) -> np.ndarray:
        fs = self.recording.sampling_rate_hz
        return np.array([ev.pair.peak_sample / fs for ev in self.events])

    def channels(self) -> list[str]:
        return [ev.candidate.channel for ev in self.events]


class CandidateDetector(BaseEstimator, TransformerMixin):
    """Multi-scale CWT candidate selection.

    Parameters
    ----------
    wavelet : str
        Mother wavelet (``db2``, ``db4``, ``db5``, ``coif4`` or ``sym8``).
    scales : sequence of float or None
        Scales in samples; ``None`` rescales the 200 Hz reference set.
    k : float
        Threshold multiplier on the window standard deviation.
    window_s, hop_s : float
        Analysis window length and hop.
    min_separation_ms : float
        Candidates closer than this on one channel are merged.
    cascade_iterations : int
        Refinement depth of the tabulated wavelet.
    n_jobs : int
        Worker processes over channels.
    """

    def __init__(
        self,
        wavelet="db2",
        scales=None,
        k=3.0,
        window_s=10.0,
        hop_s=9.5,
        min_separation_ms=50.0,
        cascade_iterations=10,
        n_jobs=1,
    ):
        self.wavelet = wavelet
        self.scales = scales
        self.k = k
        self.window_s = window_s
        self.hop_s = hop_s
        self.min_separation_ms = min_separation_ms
        self.cascade_iterations = cascade_iterations
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        check_positive(self.k, "k")
        check_positive(self.min_separation_ms, "min_separation_ms")
        check_positive(self.n_jobs, "n_jobs", integer=True)
        self.window_spec_ = WindowSpec(self.window_s, self.hop_s)
        self.table_ = build_wavelet_table(self.wavelet, self.cascade_iterations)
        return self

    def transform(self, X) -> CandidateSet:
        check_is_fitted(self, "table_")
        rec = check_recording(X)
        cands = collect_candidates(
            rec,
            wavelet=self.wavelet,
            scales=self.scales,
            k=self.k,
            spec=self.window_spec_,
            min_separation_ms=self.min_separation_ms,
            cascade_iterations=self.cascade_iterations,
            n_jobs=self.n_jobs,
        )
        logger.info("%d candidates on %d channels", len(cands), len(rec.labels))
        return CandidateSet(rec, tuple(cands), self.wavelet, self.cascade_iterations)


class MimeticFeatureExtractor(BaseEstimator, TransformerMixin):
    """Half-wave decomposition of each candidate into the nine features.

    Parameters
    ----------
    scale_aware_snap : bool
        Widen the peak-snap radius by one wavelet-lobe spacing at the
        candidate's scale (``False`` keeps a fixed 25 ms).
    """

    def __init__(self, scale_aware_snap=True):
        self.scale_aware_snap = scale_aware_snap

    def fit(self, X=None, y=None):
        self.n_features_out_ = len(FEATURE_NAMES)
        return self

    def transform(self, X: CandidateSet) -> FeatureTable:
        check_is_fitted(self, "n_features_out_")
        if not isinstance(X, CandidateSet):
            raise TypeError(f"expected a CandidateSet, got {type(X).__name__}")
        sep = None
        if self.scale_aware_snap:
            sep = build_wavelet_table(X.wavelet, X.cascade_iterations).lobe_separation
        events = tuple(extract_events(X.recording, X.candidates, sep))
        feats = np.array([ev.features for ev in events], dtype=float).reshape(len(events), len(FEATURE_NAMES))
        return FeatureTable(X.recording, events, feats)

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURE_NAMES, dtype=object)


class FuzzySpikeClassifier(BaseEstimator, ClassifierMixin):
    """Mamdani fuzzy classifier over feature vectors.

    The rule base is fixed, so ``fit`` only loads and validates it.

    Parameters
    ----------
    rulebase : str, path or None
        Rule-base file; ``None`` uses the packaged default.
    threshold : float
        Score at or above which an event is ``epileptiform``.
    """

    def __init__(self, rulebase=None, threshold=EPILEPTIFORM_THRESHOLD):
        self.rulebase = rulebase
        self.threshold = threshold

    def fit(self, X=None, y=None):
        check_unit_interval(self.threshold, "threshold")
        if X is not None:
            check_feature_matrix(X)
        self.rulebase_ = load_rulebase(self.rulebase)
        self.classes_ = np.array(DETECTION_CLASSES)
        self.n_features_in_ = len(FEATURE_NAMES)
        return self

    def decision_function(self, X) -> np.ndarray:
        """Defuzzified score in [0, 1] per row."""
        check_is_fitted(self, "rulebase_")
        scores, _ = classify_batch(check_feature_matrix(X), self.rulebase_)
        return scores

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.array([label_for(s, self.threshold) for s in scores], dtype=object)


class SpikeDetector(BaseEstimator):
    """End-to-end detector: candidates, features, fuzzy scores, post-classification.

    Parameters mirror :class:`CandidateDetector` and :class:`FuzzySpikeClassifier`;
    ``postclass`` switches the rejection stage and ``enabled_rules`` selects
    its rules (``None`` = all of ``a``-``e``).
    """

    def __init__(
        self,
        wavelet="db2",
        scales=None,
        k=3.0,
        window_s=10.0,
        hop_s=9.5,
        min_separation_ms=50.0,
        cascade_iterations=10,
        rulebase=None,
        threshold=EPILEPTIFORM_THRESHOLD,
        postclass=True,
        enabled_rules=None,
        scale_aware_snap=True,
        n_jobs=1,
    ):
        self.wavelet = wavelet
        self.scales = scales
        self.k = k
        self.window_s = window_s
        self.hop_s = hop_s
        self.min_separation_ms = min_separation_ms
        self.cascade_iterations = cascade_iterations
        self.rulebase = rulebase
        self.threshold = threshold
        self.postclass = postclass
        self.enabled_rules = enabled_rules
        self.scale_aware_snap = scale_aware_snap
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        self.candidate_detector_ = CandidateDetector(
            self.wavelet,
            self.scales,
            self.k,
            self.window_s,
            self.hop_s,
            self.min_separation_ms,
            self.cascade_iterations,
            self.n_jobs,
        ).fit()
        self.extractor_ = MimeticFeatureExtractor(self.scale_aware_snap).fit()
        self.classifier_ = FuzzySpikeClassifier(self.rulebase, self.threshold).fit()
        self.enabled_rules_ = parse_enabled(self.enabled_rules)
        return self

    def features(self, recording) -> FeatureTable:
        check_is_fitted(self, "classifier_")
        return self.extractor_.transform(self.candidate_detector_.transform(recording))

    def score_events(self, recording, table: FeatureTable | None = None) -> list[ClassifiedEvent]:
        """Scored events before post-classification, sorted by (channel, time)."""
        table = self.features(recording) if table is None else table
        scores = self.classifier_.decision_function(table.features)
        out = [
            ClassifiedEvent(ch, float(t), float(s), label_for(s, self.threshold), ev.features)
            for ch, t, s, ev in zip(table.channels(), table.times_s(), scores, table.events)
        ]
        out.sort(key=lambda e: (e.channel, e.time_s))
        return out

    def postclassify(self, events: Sequence[ClassifiedEvent]) -> list[ClassifiedEvent]:
        check_is_fitted(self, "enabled_rules_")
        if not self.postclass:
            return list(events)
        return apply_rejection_rules(events, self.enabled_rules_)

    def detect(self, recording) -> DetectionList:
        return to_detection_list(self.postclassify(self.score_events(recording)))

    def predict(self, recording) -> DetectionList:
        return self.detect(recording)
