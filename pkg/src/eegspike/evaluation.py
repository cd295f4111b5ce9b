"""Event matching, sensitivity/specificity and threshold sweeps.

A detection counts for a mark when it lies strictly less than ``tol_ms``
from it on the same channel.  Several positives near one mark are grouped
into a single true positive; marks on a channel closer than the tolerance
to each other form one group.  Negatives are the candidates classified as
non-positive: those away from every mark are true negatives.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .exceptions import LabelError, RangeError, UndefinedRateError
from .postclass import ClassifiedEvent, apply_rejection_rules
from .signal_io import AnnotationSet, DetectionList

DEFAULT_TOLERANCE_MS = 50.0
DEFAULT_THRESHOLDS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
ROC_HEADER = ["threshold", "tp", "fp", "tn", "fn", "sensitivity", "specificity"]
_EPS = 1e-9


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise RangeError(f"{name} must be a non-negative integer, got {v!r}")

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def sensitivity(c: MatchCounts) -> float:
    """``TP / (TP + FN)``; raises :class:`UndefinedRateError` without marks."""
    if c.tp + c.fn == 0:
        raise UndefinedRateError("sensitivity undefined: no annotated events")
    return c.tp / (c.tp + c.fn)


def specificity(c: MatchCounts) -> float:
    """``TN / (TN + FP)``; raises :class:`UndefinedRateError` without negatives."""
    if c.tn + c.fp == 0:
        raise UndefinedRateError("specificity undefined: no unannotated events")
    return c.tn / (c.tn + c.fp)


def rate_or_none(fn, c):
    """``fn(c)``, or ``None`` when the rate is undefined."""
    try:
        return fn(c)
    except UndefinedRateError:
        return None


def format_rate(value: float | None) -> str:
    return "N/A" if value is None else f"{value:.4f}"


def group_marks(times, tol_s: float) -> list[tuple[float, float]]:
    """Cluster sorted mark times whose consecutive gaps are below ``tol_s``; returns (first, last)."""
    groups: list[tuple[float, float]] = []
    for t in times:
        if groups and t - groups[-1][1] < tol_s - _EPS:
            groups[-1] = (groups[-1][0], t)
        else:
            groups.append((t, t))
    return groups


def _near_any(t: float, marks: list[float], tol_s: float) -> bool:
    j = bisect.bisect_left(marks, t)
    for k in (j - 1, j):
        if 0 <= k < len(marks) and abs(marks[k] - t) < tol_s - _EPS:
            return True
    return False


def _match_channel(pos: list[float], neg: list[float], marks: list[float], tol_s: float) -> MatchCounts:
    groups = group_marks(marks, tol_s)
    # windows are matched in order of their right edge to the earliest free
    # positive inside them, which yields a maximum matching
    windows = sorted(((a - tol_s, b + tol_s) for a, b in groups), key=lambda w: w[1])
    used = [False] * len(pos)
    tp = 0
    for lo, hi in windows:
        j = bisect.bisect_left(pos, lo)
        while j < len(pos) and (used[j] or pos[j] - lo <= _EPS):
            j += 1
        if j < len(pos) and pos[j] < hi - _EPS:
            used[j] = True
            tp += 1
    fp = sum(not _near_any(t, marks, tol_s) for t in pos)
    tn = sum(not _near_any(t, marks, tol_s) for t in neg)
    return MatchCounts(tp, fp, tn, len(groups) - tp)


def match_events(
    detections: DetectionList | Iterable,
    annotations: AnnotationSet,
    tol_ms: float = DEFAULT_TOLERANCE_MS,
    labels: Iterable[str] | None = None,
) -> MatchCounts:
    """Count TP/FP/TN/FN of ``detections`` against ``annotations``.

    ``labels`` is the recording's channel set; when given, detections or
    marks on other channels raise :class:`LabelError`.
    """
    if not tol_ms > 0:
        raise RangeError(f"tolerance must be positive, got {tol_ms!r}")
    tol_s = tol_ms / 1000.0
    dets = list(detections)
    if labels is not None:
        known = set(labels)
        stray = ({d.channel for d in dets} | annotations.labels) - known
        if stray:
            raise LabelError(f"channel(s) not in the recording: {', '.join(sorted(stray))}")
    marks = {ch: sorted(ts.tolist()) for ch, ts in annotations.by_channel().items()}
    pos: dict[str, list[float]] = {}
    neg: dict[str, list[float]] = {}
    for d in dets:
        (pos if d.label == "epileptiform" else neg).setdefault(d.channel, []).append(float(d.time_s))
    total = MatchCounts()
    for ch in sorted(set(marks) | set(pos) | set(neg)):
        total = total + _match_channel(
            sorted(pos.get(ch, [])), sorted(neg.get(ch, [])), marks.get(ch, []), tol_s
        )
    return total


# -- ROC ----------------------------------------------------------------------


class RocPoint(NamedTuple):
    threshold: float
    counts: MatchCounts
    sensitivity: float | None
    specificity: float | None

    @property
    def false_positive_rate(self) -> float | None:
        return None if self.specificity is None else 1.0 - self.specificity


@dataclass(frozen=True)
class RocCurve:
    points: tuple[RocPoint, ...]
    optimal: RocPoint | None

    @property
    def thresholds(self) -> list[float]:
        return [p.threshold for p in self.points]

    @staticmethod
    def diagonal() -> tuple[tuple[float, float], tuple[float, float]]:
        """Chance-level reference, as (false-positive rate, sensitivity) end points."""
        return (0.0, 0.0), (1.0, 1.0)


def relabel(events: Sequence[ClassifiedEvent], threshold: float) -> list[ClassifiedEvent]:
    """Re-classify by ``score >= threshold``, clearing earlier rejections."""
    return [
        ev._replace(label="epileptiform" if ev.score >= threshold else "non_epileptiform", rejected_by=None)
        for ev in events
    ]


def _check_thresholds(thresholds) -> list[float]:
    ts = [float(t) for t in thresholds]
    if any(not math.isfinite(t) for t in ts):
        raise RangeError("thresholds must be finite")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise RangeError(f"thresholds must be strictly increasing: {ts}")
    return ts


def roc_sweep(
    events: Sequence[ClassifiedEvent],
    annotations: AnnotationSet,
    thresholds=DEFAULT_THRESHOLDS,
    postclass: bool = True,
    enabled=None,
    tol_ms: float = DEFAULT_TOLERANCE_MS,
    labels=None,
) -> RocCurve:
    """Sweep the decision threshold over scored events.

    At each threshold events are re-labelled, optionally post-classified and
    matched.  The optimal point maximises sensitivity + specificity (ties to
    the higher threshold); points with an undefined rate are not eligible.
    """
    ts = _check_thresholds(thresholds)
    events = sorted(events, key=lambda e: (e.channel, e.time_s))
    points = []
    for t in ts:
        evs = relabel(events, t)
        if postclass:
            evs = apply_rejection_rules(evs, enabled)
        c = match_events(evs, annotations, tol_ms, labels)
        points.append(RocPoint(t, c, rate_or_none(sensitivity, c), rate_or_none(specificity, c)))
    scored = [p for p in points if p.sensitivity is not None and p.specificity is not None]
    optimal = max(scored, key=lambda p: (p.sensitivity + p.specificity, p.threshold), default=None)
    return RocCurve(tuple(points), optimal)


# -- report -------------------------------------------------------------------


def roc_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROC_HEADER)
    for p in curve.points:
        c = p.counts
        w.writerow([f"{p.threshold:g}", c.tp, c.fp, c.tn, c.fn, format_rate(p.sensitivity), format_rate(p.specificity)])
    return buf.getvalue()


def roc_svg(curve: RocCurve, title: str = "ROC") -> str:
    """Deterministic SVG: sensitivity vs 100 - specificity (percent), with the chance diagonal."""
    w, h, m = 420, 420, 60
    span = w - 2 * m

    def xy(fpr, sens):
        return m + fpr * span, h - m - sens * span

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<title>{title}</title>',
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<rect x="{m}" y="{m}" width="{span}" height="{span}" fill="none" stroke="black"/>',
    ]
    for pct in range(0, 101, 20):
        x, _ = xy(pct / 100, 0)
        _, y = xy(0, pct / 100)
        out.append(f'<line x1="{x:.2f}" y1="{h - m}" x2="{x:.2f}" y2="{h - m + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{h - m + 18}" font-size="11" text-anchor="middle">{pct}</text>')
        out.append(f'<line x1="{m - 5}" y1="{y:.2f}" x2="{m}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{m - 8}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{pct}</text>')
    out.append(f'<text x="{w / 2:.0f}" y="{h - 20}" font-size="12" text-anchor="middle">100 - Specificity (%)</text>')
    out.append(
        f'<text x="18" y="{h / 2:.0f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 18 {h / 2:.0f})">Sensitivity (%)</text>'
    )
    (x0, y0), (x1, y1) = (xy(*p) for p in RocCurve.diagonal())
    out.append(
        f'<line class="diagonal" x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
        'stroke="gray" stroke-dasharray="4 4"/>'
    )
    pts = [p for p in curve.points if p.sensitivity is not None and p.specificity is not None]
    if pts:
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (xy(p.false_positive_rate, p.sensitivity) for p in pts))
        out.append(f'<polyline points="{coords}" fill="none" stroke="navy"/>')
    for p in pts:
        x, y = xy(p.false_positive_rate, p.sensitivity)
        opt = curve.optimal is not None and p.threshold == curve.optimal.threshold
        fill = "crimson" if opt else "navy"
        out.append(
            f'<circle class="marker" cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{fill}">'
            f"<title>t={p.threshold:g}</title></circle>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_report(curve: RocCurve, csv_path, svg_path=None, title: str = "ROC") -> tuple[Path, Path]:
    """Write the ROC table and plot; the SVG defaults to ``csv_path`` with a ``.svg`` suffix."""
    csv_path = Path(csv_path)
    svg_path = csv_path.with_suffix(".svg") if svg_path is None else Path(svg_path)
    csv_path.write_text(roc_csv(curve), encoding="utf-8")
    svg_path.write_text(roc_svg(curve, title), encoding="utf-8")
    return csv_path, svg_path

