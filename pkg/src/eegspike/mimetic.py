"""Half-wave decomposition and the nine interval-amplitude features."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import trim_mean

from .exceptions import DegenerateEventError

logger = logging.getLogger(__name__)

SNAP_MS = 25.0
SEARCH_MS = 400.0
BASELINE_MS = 500.0
BASELINE_TRIM = 0.1
RIPPLE_FRACTION = 0.25
RIPPLE_MS = 10.0

FEATURE_NAMES = (
    "amp1_uv",
    "amp2_uv",
    "amp_baseline_uv",
    "durA_ms",
    "durB_ms",
    "dur1_ms",
    "dur2_ms",
    "slope1",
    "slope2",
)


@dataclass(frozen=True)
class HalfWavePair:
    start_sample: int
    peak_sample: int
    end_sample: int
    peak_polarity: str  # "positive" | "negative"

    @property
    def sign(self) -> float:
        return 1.0 if self.peak_polarity == "positive" else -1.0


class FeatureVector(NamedTuple):
    amp1_uv: float
    amp2_uv: float
    amp_baseline_uv: float
    durA_ms: float
    durB_ms: float
    dur1_ms: float
    dur2_ms: float
    slope1: float  # µV/ms
    slope2: float  # µV/ms

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def _local_extrema(x, lo, hi):
    """Indices in [lo, hi] that are local maxima (+1) or minima (-1).

    On a plateau only the first sample counts.
    """
    i = np.arange(max(lo, 1), min(hi, len(x) - 2) + 1)
    if i.size == 0:
        return i, i
    prev, cur, nxt = x[i - 1], x[i], x[i + 1]
    is_max = (cur > prev) & (cur >= nxt)
    is_min = (cur < prev) & (cur <= nxt)
    # a plateau top only counts if the signal eventually falls on the far side
    keep = is_max | is_min
    idx = i[keep]
    kind = np.where(is_max[keep], 1, -1)
    out_idx, out_kind = [], []
    for j, k in zip(idx, kind):
        m = j + 1
        while m < len(x) and x[m] == x[j]:
            m += 1
        if m < len(x) and (x[m] - x[j]) * k < 0:
            out_idx.append(j)
            out_kind.append(k)
    return np.array(out_idx, dtype=int), np.array(out_kind, dtype=int)


def _walk(x, peak, sign, step, limit, ripple_tol=0.0, ripple_len=1):
    """Follow the flank away from the peak to its turning point.

    The walk stops where the first difference changes sign, unless the
    flank resumes past that point within ``ripple_len`` samples while the
    reversal stays within ``ripple_tol``; such ripples are stepped over.
    The ends of the signal count as turning points.  Returns ``None`` when
    the flank is still descending after ``limit`` samples.
    """
    n = len(x)
    i = peak
    while True:
        j = i + step
        if j < 0 or j >= n:
            return i
        if abs(j - peak) > limit:
            return None
        if sign * (x[i] - x[j]) > 0:
            i = j
            continue
        while (
            0 <= j < n
            and abs(j - i) <= ripple_len + 1
            and abs(j - peak) <= limit
            and sign * (x[j] - x[i]) <= ripple_tol
        ):
            if sign * (x[i] - x[j]) > 0:
                break
            j += step
        else:
            return i
        if not (0 <= j < n) or abs(j - i) > ripple_len + 1 or abs(j - peak) > limit or sign * (x[i] - x[j]) <= 0:
            return i
        i = j


def decompose_halfwaves(samples, fs: float, approx_peak_sample: int, snap_ms: float = SNAP_MS) -> HalfWavePair:
    """Split the waveform around ``approx_peak_sample`` into two half-waves.

    The peak is snapped to the most prominent raw-signal extremum within
    ``snap_ms`` (prominence measured against the median of the surrounding
    second, ties to the nearest); the half-wave boundaries are the turning
    points reached by walking down each flank.
    """
    x = np.asarray(samples, dtype=float)
    p = int(approx_peak_sample)
    if not 0 <= p < len(x):
        raise DegenerateEventError(f"peak sample {p} outside signal of length {len(x)}")
    w = max(1, int(round(snap_ms * fs / 1000.0)))
    idx, kind = _local_extrema(x, p - w, p + w)
    if idx.size == 0:
        raise DegenerateEventError(f"no local extremum within {snap_ms:g} ms of sample {p}")
    ctx = int(round(BASELINE_MS * fs / 1000.0))
    ref = np.median(x[max(0, p - ctx) : p + ctx + 1])
    prominence = np.abs(x[idx] - ref)
    best = np.lexsort((np.abs(idx - p), -prominence))[0]
    peak, sign = int(idx[best]), float(kind[best])

    limit = int(round(SEARCH_MS * fs / 1000.0))
    ripple_len = max(1, int(round(RIPPLE_MS * fs / 1000.0)))
    tol = RIPPLE_FRACTION * float(prominence[best])
    start = _walk(x, peak, sign, -1, limit, tol, ripple_len)
    end = _walk(x, peak, sign, +1, limit, tol, ripple_len)
    if start is None or end is None:
        raise DegenerateEventError(f"no turning point within {SEARCH_MS} ms of peak {peak}")
    if not start < peak < end:
        raise DegenerateEventError(f"zero-length half-wave at peak {peak}")
    return HalfWavePair(start, peak, end, "positive" if sign > 0 else "negative")


def _baseline(x, pair: HalfWavePair, fs: float) -> float:
    ctx = int(round(BASELINE_MS * fs / 1000.0))
    lo = max(0, pair.peak_sample - ctx)
    hi = min(len(x), pair.peak_sample + ctx + 1)
    keep = np.ones(hi - lo, dtype=bool)
    keep[max(0, pair.start_sample - lo) : max(0, pair.end_sample + 1 - lo)] = False
    around = x[lo:hi][keep]
    if around.size == 0:
        return float(x[pair.start_sample])
    return float(trim_mean(around, BASELINE_TRIM))


def _near_max(d: np.ndarray) -> np.ndarray:
    top = d.max()
    return d >= top - 1e-9 * max(top, 1.0)


def extract_features(pair: HalfWavePair, samples, fs: float) -> FeatureVector:
    x = np.asarray(samples, dtype=float)
    s, p, e = pair.start_sample, pair.peak_sample, pair.end_sample
    if not s < p < e:
        raise DegenerateEventError("zero-duration half-wave")
    ms = 1000.0 / fs
    amp1 = abs(x[p] - x[s])
    amp2 = abs(x[p] - x[e])
    amp_base = abs(x[p] - _baseline(x, pair, fs))
    dur_a = (p - s) * ms
    dur_b = (e - p) * ms

    d = np.abs(np.diff(x))
    # ties (to rounding) resolve to the difference farthest from the peak
    first = np.flatnonzero(_near_max(d[s:p]))
    i1 = s + int(first[0])
    second = np.flatnonzero(_near_max(d[p:e]))
    i2 = p + int(second[-1])
    dur2 = (i2 - i1) * ms

    return FeatureVector(
        *map(float, (amp1, amp2, amp_base, dur_a, dur_b, dur_a + dur_b, dur2, amp1 / dur_a, amp2 / dur_b))
    )


class ExtractedEvent(NamedTuple):
    candidate: object
    pair: HalfWavePair
    features: FeatureVector


def snap_window_ms(scale_a: float, fs: float, lobe_separation: float) -> float:
    """Snap radius for a candidate found at ``scale_a``.

    With ``|coef|`` peaks a biphasic waveform can align with either lobe of
    the wavelet, so the radius covers one lobe spacing plus a sample, and
    never drops below 25 ms.
    """
    return max(SNAP_MS, (lobe_separation * scale_a + 1.0) * 1000.0 / fs)


def extract_events(recording, candidates: Sequence, lobe_separation: float | None = None) -> list[ExtractedEvent]:
    """Decompose each candidate; degenerate ones are dropped and logged.

    ``lobe_separation`` (natural wavelet time) widens the snap radius per
    scale, see :func:`snap_window_ms`; ``None`` keeps the fixed 25 ms.
    Candidates snapping to the same raw peak on a channel are collapsed to
    the one with the largest |coefficient|.
    """
    fs = recording.sampling_rate_hz
    index = {lab: i for i, lab in enumerate(recording.labels)}
    best: dict[tuple[str, int], ExtractedEvent] = {}
    dropped = 0
    for cand in candidates:
        x = recording.data[index[cand.channel]]
        try:
            snap = SNAP_MS if lobe_separation is None else snap_window_ms(cand.scale_a, fs, lobe_separation)
            pair = decompose_halfwaves(x, fs, cand.peak_sample, snap)
            feats = extract_features(pair, x, fs)
        except DegenerateEventError as exc:
            dropped += 1
            logger.debug("discarding %s @ %.3f s: %s", cand.channel, cand.peak_time_s, exc)
            continue
        key = (cand.channel, pair.peak_sample)
        prev = best.get(key)
        if prev is None or abs(cand.coefficient) > abs(prev.candidate.coefficient):
            best[key] = ExtractedEvent(cand, pair, feats)
    if dropped:
        logger.info("discarded %d degenerate candidates", dropped)
    return sorted(best.values(), key=lambda ev: (ev.candidate.channel, ev.pair.peak_sample))


def write_features(events: Sequence[ExtractedEvent], fs: float, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["channel", "time_s", *FEATURE_NAMES])
    for ev in events:
        writer.writerow(
            [ev.candidate.channel, f"{ev.pair.peak_sample / fs:.6f}", *(f"{v:.6f}" for v in ev.features)]
        )
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
