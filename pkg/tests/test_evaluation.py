import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegspike.evaluation import (
    MatchCounts,
    RocCurve,
    format_rate,
    group_marks,
    match_events,
    rate_or_none,
    relabel,
    roc_csv,
    roc_sweep,
    sensitivity,
    specificity,
    write_report,
)
from eegspike.exceptions import LabelError, RangeError, UndefinedRateError
from eegspike.mimetic import FeatureVector
from eegspike.postclass import ClassifiedEvent
from eegspike.signal_io import AnnotationSet, Detection, Mark

from oracles import brute_force_matching

F = FeatureVector(120.0, 150.0, 140.0, 15.0, 30.0, 45.0, 30.0, 8.0, 5.0)


def pos(t, ch="C01"):
    return Detection(ch, t, 0.9, "epileptiform")


def neg(t, ch="C01"):
    return Detection(ch, t, 0.2, "non_epileptiform")


def ann(*times, ch="C01"):
    return AnnotationSet([Mark(ch, t) for t in times])


def test_single_match():
    assert match_events([pos(10.030)], ann(10.0)) == MatchCounts(1, 0, 0, 0)


def test_grouping_of_detections():
    assert match_events([pos(10.010), pos(10.040)], ann(10.0)) == MatchCounts(1, 0, 0, 0)


def test_outside_tolerance():
    assert match_events([pos(10.080)], ann(10.0)) == MatchCounts(0, 1, 0, 1)


def test_exact_tolerance_is_outside():
    assert match_events([pos(10.050)], ann(10.0)) == MatchCounts(0, 1, 0, 1)


def test_negatives():
    c = match_events([neg(3.0), neg(10.01)], ann(10.0))
    assert c == MatchCounts(0, 0, 1, 1)


def test_channels_are_separate():
    assert match_events([pos(10.0, "C02")], ann(10.0)) == MatchCounts(0, 1, 0, 1)


def test_close_marks_form_one_group():
    assert group_marks([1.0, 1.03, 1.2], 0.05) == [(1.0, 1.03), (1.2, 1.2)]
    assert match_events([pos(1.01)], ann(1.0, 1.03)) == MatchCounts(1, 0, 0, 0)


def test_unknown_channel_is_label_error():
    with pytest.raises(LabelError):
        match_events([pos(1.0, "X9")], ann(1.0), labels=["C01"])
    with pytest.raises(RangeError):
        match_events([pos(1.0)], ann(1.0), tol_ms=0)


@pytest.mark.parametrize("delta", [0.0, 0.01, 0.049, 0.05, 0.07])
def test_symmetric_tolerance(delta):
    assert match_events([pos(10.0 + delta)], ann(10.0)) == match_events([pos(10.0 - delta)], ann(10.0))


def test_rates():
    assert sensitivity(MatchCounts(tp=84, fn=16)) == pytest.approx(0.84)
    assert specificity(MatchCounts(tn=70, fp=30)) == pytest.approx(0.70)
    with pytest.raises(UndefinedRateError):
        sensitivity(MatchCounts())
    assert format_rate(rate_or_none(sensitivity, MatchCounts())) == "N/A"
    with pytest.raises(RangeError):
        MatchCounts(tp=-1)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.integers(0, 60), max_size=7, unique=True),
    st.lists(st.integers(0, 60), max_size=7, unique=True),
)
def test_matching_is_maximum(p, m):
    # 10 ms grid, tolerance of 50 ms = 5 ticks; marks spaced >= tol are separate groups
    marks = sorted(m)
    merged = [t for i, t in enumerate(marks) if i == 0 or t - marks[i - 1] >= 5]
    pos_t = [t / 100 for t in sorted(p)]
    mark_t = [t / 100 for t in merged]
    c = match_events([pos(t) for t in pos_t], ann(*mark_t))
    assert c.tp == brute_force_matching(pos_t, mark_t, 0.05)
    assert c.tp + c.fn == len(mark_t)


def _scored(rows):
    return [ClassifiedEvent("C01", t, s, "non_epileptiform", F) for t, s in rows]


def test_roc_endpoints():
    events = _scored([(1.0, 0.9), (2.0, 0.4), (3.0, 0.3), (4.0, 0.85)])
    marks = ann(1.0, 2.0)
    curve = roc_sweep(events, marks, [0.1, 0.5, 1.01], postclass=False)
    lo, mid, hi = curve.points
    # everything positive: every candidate-stage hit found, every unmarked event a false positive
    assert (lo.sensitivity, lo.specificity) == (1.0, 0.0)
    assert (mid.sensitivity, mid.specificity) == (0.5, 0.5)
    # nothing positive
    assert (hi.sensitivity, hi.specificity) == (0.0, 1.0)
    # all three points tie on sens + spec; the highest threshold wins
    assert curve.optimal is hi


def test_roc_without_marks_is_na():
    curve = roc_sweep(_scored([(1.0, 0.9)]), AnnotationSet([]), [1.01], postclass=False)
    assert curve.points[0].sensitivity is None and curve.points[0].specificity == 1.0


def test_relabel_clears_rejections():
    e = ClassifiedEvent("C01", 1.0, 0.6, "non_epileptiform", F, "e")
    (r,) = relabel([e], 0.5)
    assert r.label == "epileptiform" and r.rejected_by is None


def test_roc_rejects_bad_thresholds():
    with pytest.raises(RangeError):
        roc_sweep([], ann(1.0), [0.5, 0.4])


def test_roc_with_postclass_is_no_less_specific():
    rng = np.random.default_rng(5)
    rows = [(float(t), float(s)) for t, s in zip(np.sort(rng.uniform(0, 30, 150)), rng.uniform(0, 1, 150))]
    events = _scored(rows)
    marks = ann(*[t for t, _ in rows[::3]])
    a = roc_sweep(events, marks, postclass=False)
    b = roc_sweep(events, marks, postclass=True)
    for p, q in zip(a.points, b.points):
        assert q.counts.tp <= p.counts.tp and q.counts.fp <= p.counts.fp
        assert q.counts.tp + q.counts.fn == p.counts.tp + p.counts.fn


def test_monte_carlo_diagonal():
    rng = np.random.default_rng(2024)
    ts = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    gaps = []
    for _ in range(1000):
        times = np.arange(40) * 0.5
        scores = rng.uniform(0, 1, 40)
        marked = rng.uniform(size=40) < 0.5
        if marked.all() or not marked.any():
            continue
        curve = roc_sweep(_scored(zip(times, scores)), ann(*times[marked]), ts, postclass=False)
        gaps.append([p.sensitivity - p.false_positive_rate for p in curve.points])
    mean_gap = np.mean(gaps, axis=0)
    stderr = np.std(gaps, axis=0) / np.sqrt(len(gaps))
    assert np.all(np.abs(mean_gap) < 4 * stderr + 1e-3)


def _curve():
    events = _scored([(float(i), s) for i, s in enumerate(np.linspace(0.05, 0.95, 20))])
    return roc_sweep(events, ann(*range(0, 20, 2)), postclass=False)


def test_report_is_deterministic(tmp_path):
    a = write_report(_curve(), tmp_path / "a.csv")
    b = write_report(_curve(), tmp_path / "b.csv", tmp_path / "b.svg")
    assert a[0].read_bytes() == b[0].read_bytes() and a[1].read_bytes() == b[1].read_bytes()
    assert a[1].name == "a.svg"


def test_report_has_one_row_and_marker_per_threshold(tmp_path):
    csv_path, svg_path = write_report(_curve(), tmp_path / "roc.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "threshold,tp,fp,tn,fn,sensitivity,specificity" and len(lines) == 8
    svg = svg_path.read_text()
    assert svg.count('class="marker"') == 7 and 'class="diagonal"' in svg


def test_empty_curve(tmp_path):
    curve = RocCurve((), None)
    assert roc_csv(curve) == "threshold,tp,fp,tn,fn,sensitivity,specificity\n"
    _, svg_path = write_report(curve, tmp_path / "e.csv")
    svg = svg_path.read_text()
    assert 'class="marker"' not in svg and 'class="diagonal"' in svg


def test_match_counts_add():
    assert MatchCounts(1, 2, 3, 4) + MatchCounts(1, 1, 1, 1) == MatchCounts(2, 3, 4, 5)


def test_matching_is_order_independent():
    dets = [pos(1.0), pos(1.04), neg(2.0), pos(3.3)]
    for perm in itertools.permutations(dets):
        assert match_events(list(perm), ann(1.02, 3.0)) == MatchCounts(1, 1, 1, 1)
