"""Heuristic rejection of false positives after fuzzy scoring.

Four feature rules reject events whose shape matches a known artifact or
background pattern; a fifth, temporal, rule rejects a positive that follows
a surviving positive on the same channel by less than 100 ms.  Rejected
events are downgraded to ``non_epileptiform`` and keep their score;
events that are not positive pass through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

from .exceptions import ConfigError, PreconditionError
from .mimetic import FeatureVector
from .signal_io import Detection, DetectionList

TEMPORAL_GAP_MS = 100.0


class ClassifiedEvent(NamedTuple):
    channel: str
    time_s: float
    score: float
    label: str
    features: FeatureVector
    rejected_by: str | None = None

    @property
    def positive(self) -> bool:
        return self.label == "epileptiform"

    def to_detection(self) -> Detection:
        return Detection(self.channel, self.time_s, self.score, self.label, self.rejected_by)


@dataclass(frozen=True)
class RejectionRule:
    id: str
    target_label: str
    predicate: Callable[[FeatureVector], bool]
    description: str = ""


FEATURE_RULES: tuple[RejectionRule, ...] = (
    RejectionRule("a", "alpha rhythm", lambda f: f.amp1_uv < 50.0 and f.amp2_uv < 50.0, "AMP1 and AMP2 < 50 µV"),
    RejectionRule("b", "EMG/alpha", lambda f: f.dur1_ms < 20.0, "DUR1 < 20 ms"),
    RejectionRule("c", "K complex", lambda f: f.dur1_ms > 350.0, "DUR1 > 350 ms"),
    RejectionRule("d", "EOG", lambda f: f.durA_ms > 150.0 or f.durB_ms > 150.0, "DURA or DURB > 150 ms"),
)
TEMPORAL_RULE_ID = "e"
TEMPORAL_TARGET = "temporal context"
RULE_IDS = tuple(r.id for r in FEATURE_RULES) + (TEMPORAL_RULE_ID,)
TARGET_LABELS = {**{r.id: r.target_label for r in FEATURE_RULES}, TEMPORAL_RULE_ID: TEMPORAL_TARGET}


def parse_enabled(enabled: Iterable[str] | str | None) -> frozenset[str]:
    """Normalise a rule selection (``None`` = all) and reject unknown ids."""
    if enabled is None:
        return frozenset(RULE_IDS)
    if isinstance(enabled, str):
        enabled = [t for t in enabled.replace(",", " ").replace("[", " ").replace("]", " ").split() if t]
    ids = frozenset(str(e).strip().lower() for e in enabled)
    unknown = ids - set(RULE_IDS)
    if unknown:
        raise ConfigError(f"unknown post-classification rule(s): {', '.join(sorted(unknown))}")
    return ids


def _check_sorted(events: Sequence[ClassifiedEvent]) -> None:
    for prev, cur in zip(events, events[1:]):
        if (cur.channel, cur.time_s) < (prev.channel, prev.time_s):
            raise PreconditionError(
                f"events must be sorted by (channel, time): {prev.channel}@{prev.time_s} before "
                f"{cur.channel}@{cur.time_s}"
            )


def apply_rejection_rules(
    events: Sequence[ClassifiedEvent],
    enabled: Iterable[str] | str | None = None,
    gap_ms: float = TEMPORAL_GAP_MS,
) -> list[ClassifiedEvent]:
    """Downgrade positives that match an enabled rejection rule.

    Feature rules are tried in order ``a``-``d`` and the first one that
    fires is recorded.  The temporal rule then runs per channel in
    ascending time against the last *surviving* positive, so rejected
    events never shield later ones.  The stage is idempotent.
    """
    events = list(events)
    _check_sorted(events)
    ids = parse_enabled(enabled)
    rules = [r for r in FEATURE_RULES if r.id in ids]

    out = []
    for ev in events:
        if ev.positive:
            for rule in rules:
                if rule.predicate(ev.features):
                    ev = ev._replace(label="non_epileptiform", rejected_by=rule.id)
                    break
        out.append(ev)

    if TEMPORAL_RULE_ID in ids:
        gap_s = gap_ms / 1000.0
        last: dict[str, float] = {}
        for i, ev in enumerate(out):
            if not ev.positive:
                continue
            prev = last.get(ev.channel)
            # the tolerance keeps an exact 100 ms spacing from being rejected by rounding
            if prev is not None and ev.time_s - prev < gap_s - 1e-9:
                out[i] = ev._replace(label="non_epileptiform", rejected_by=TEMPORAL_RULE_ID)
            else:
                last[ev.channel] = ev.time_s
    return out


def to_detection_list(events: Iterable[ClassifiedEvent]) -> DetectionList:
    return DetectionList([ev.to_detection() for ev in events])
