"""Candidate waveform selection from multi-scale CWT responses.

Each channel is cut into overlapping windows; in every window and at every
scale the wavelet response is compared against ``k`` times the standard
deviation of the raw window and local maxima above that level become
candidates.  Candidates closer than ``min_separation_ms`` are merged,
keeping the strongest response.

The response compared with the threshold is the CWT coefficient divided by
``sqrt(scale_s)``, i.e. the amplitude (µV) of a wavelet-shaped waveform that
would produce that coefficient.  This puts it in the same unit as the
standard deviation of the window.
"""

from __future__ import annotations

import bisect
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import RangeError
from .signal_io import Recording
from .wavelet import (
    CoefficientVector,
    ScaledKernel,
    build_wavelet_table,
    cwt,
    scale_kernel,
    select_scales,
)

logger = logging.getLogger(__name__)

MIN_TAIL_S = 2.0
# twin responses drift around the nominal lobe spacing with the waveform shape
TWIN_SLACK = 0.25


@dataclass(frozen=True)
class WindowSpec:
    window_s: float = 10.0
    hop_s: float = 9.5

    def __post_init__(self):
        if not (0 < self.hop_s <= self.window_s):
            raise RangeError(f"need 0 < hop_s <= window_s, got hop {self.hop_s}, window {self.window_s}")


class CandidateEvent(NamedTuple):
    channel: str
    peak_time_s: float
    peak_sample: int
    scale_a: float
    coefficient: float
    segment_std_uv: float


def segment_windows(samples, fs: float, spec: WindowSpec = WindowSpec()):
    """Split a channel into ``(start_sample, segment)`` windows.

    Windows start every ``hop_s``.  A trailing remainder of at least two
    seconds is kept as a short window; a shorter one is replaced by a
    full-length window aligned to the end, so every sample is covered.
    """
    x = np.asarray(samples)
    n = len(x)
    if n == 0:
        raise RangeError("cannot segment an empty channel")
    win = int(round(spec.window_s * fs))
    hop = int(round(spec.hop_s * fs))
    if win >= n:
        return [(0, x)]
    starts = list(range(0, n - win + 1, hop))
    covered = starts[-1] + win
    if covered < n:
        tail_start = starts[-1] + hop
        if n - tail_start >= MIN_TAIL_S * fs:
            starts.append(tail_start)
        else:
            starts.append(n - win)
    return [(s, x[s : s + win]) for s in starts]


def threshold_for(coeffs, segment, k: float) -> float:
    """``k`` times the population std of ``segment``; ``inf`` for a flat segment."""
    if not k > 0:
        raise RangeError(f"k must be positive, got {k!r}")
    sd = float(np.std(np.asarray(segment, dtype=float)))
    if sd == 0.0:
        logger.info("constant segment, no candidates")
        return math.inf
    return k * sd


def _suppress(positions, magnitudes, min_separation, inclusive=False, radii=None) -> list[int]:
    """Greedy non-maximum suppression; ties go to the earlier position.

    A position is dropped when an already-kept stronger one lies closer than
    ``min_separation`` (or exactly that far when ``inclusive``).  With
    per-position ``radii`` the separation for a pair is the largest of
    ``min_separation`` and the two radii.
    """
    positions = np.asarray(positions)
    magnitudes = np.asarray(magnitudes)
    radii = np.zeros(len(positions)) if radii is None else np.asarray(radii, dtype=float)
    reach = max(float(min_separation), float(radii.max(initial=0.0)))
    slack = 1e-9 if inclusive else 0.0
    order = np.lexsort((positions, -magnitudes))
    kept: list[int] = []
    kept_pos: list = []
    kept_idx: list[int] = []
    for i in order:
        p = positions[i]
        lo = bisect.bisect_left(kept_pos, p - reach - 1)
        hi = bisect.bisect_right(kept_pos, p + reach + 1)
        clash = False
        for j in range(lo, hi):
            gap = abs(kept_pos[j] - p)
            sep = max(min_separation, radii[i], radii[kept_idx[j]])
            if gap < sep or (inclusive and gap <= sep + slack):
                clash = True
                break
        if clash:
            continue
        j = bisect.bisect_left(kept_pos, p)
        kept_pos.insert(j, p)
        kept_idx.insert(j, int(i))
        kept.append(int(i))
    return sorted(kept, key=lambda i: positions[i])


def detect_peaks(coeffs, threshold: float, min_separation_samples: int = 1, exclude=None) -> list[int]:
    """Indices of local maxima of ``|coeffs|`` reaching ``threshold``.

    Within ``min_separation_samples`` only the largest survives (earliest on
    ties).  Boundary-flagged samples of a :class:`CoefficientVector`, or those
    set in ``exclude``, never qualify.
    """
    if min_separation_samples < 1:
        raise RangeError("min_separation_samples must be >= 1")
    if isinstance(coeffs, CoefficientVector):
        if exclude is None:
            exclude = coeffs.boundary
        coeffs = coeffs.coefficients
    mag = np.abs(np.asarray(coeffs, dtype=float))
    if mag.size == 0 or threshold == math.inf:
        return []
    left = np.concatenate([[-np.inf], mag[:-1]])
    right = np.concatenate([mag[1:], [-np.inf]])
    ok = (mag >= threshold) & (mag >= left) & (mag >= right)
    if exclude is not None:
        ok &= ~np.asarray(exclude, dtype=bool)
    idx = np.flatnonzero(ok)
    if idx.size <= 1:
        return idx.tolist()
    kept = _suppress(idx, mag[idx], min_separation_samples)
    return idx[kept].tolist()


def twin_radius_samples(scale_a: float, lobe_separation: float) -> float:
    """Distance within which a single waveform can also excite the opposite wavelet lobe."""
    return (1.0 + TWIN_SLACK) * lobe_separation * scale_a + 1.0


def merge_candidates(
    events: Sequence[CandidateEvent],
    fs: float,
    min_separation_ms: float = 50.0,
    lobe_separation: float | None = None,
):
    """Merge same-channel candidates within ``min_separation_ms`` (inclusive), keeping the largest |coefficient|.

    With ``lobe_separation`` (natural wavelet time) two candidates also merge
    when they are within one lobe spacing (plus slack and a sample) at the
    scale of either; these are the twin responses of one waveform to both wavelet lobes.
    """
    sep = min_separation_ms * fs / 1000.0
    out = []
    by_channel: dict[str, list[CandidateEvent]] = {}
    for ev in events:
        by_channel.setdefault(ev.channel, []).append(ev)
    for ch in sorted(by_channel):
        evs = by_channel[ch]
        radii = None
        if lobe_separation is not None:
            radii = [twin_radius_samples(e.scale_a, lobe_separation) for e in evs]
        keep = _suppress(
            [e.peak_sample for e in evs], [abs(e.coefficient) for e in evs], sep, inclusive=True, radii=radii
        )
        out.extend(evs[i] for i in keep)
    out.sort(key=lambda e: (e.channel, e.peak_sample))
    return out


def _channel_candidates(label, x, fs, kernels: Sequence[ScaledKernel], k, spec, min_separation_ms, lobe_sep):
    min_sep = max(1, int(round(min_separation_ms * fs / 1000.0)))
    found = []
    for start, seg in segment_windows(x, fs, spec):
        thr = threshold_for(None, seg, k)
        if not math.isfinite(thr):
            continue
        sd = thr / k
        for kernel in kernels:
            if len(seg) < len(kernel):
                continue
            cv = cwt(seg, kernel)
            resp = cv.coefficients / math.sqrt(kernel.scale_s)
            for p in detect_peaks(resp, thr, min_sep, exclude=cv.boundary):
                s = start + p
                found.append(CandidateEvent(label, s / fs, s, kernel.scale_a, float(resp[p]), sd))
    return merge_candidates(found, fs, min_separation_ms, lobe_sep)


def collect_candidates(
    recording: Recording,
    wavelet: str = "db2",
    scales=None,
    k: float = 3.0,
    spec: WindowSpec = WindowSpec(),
    min_separation_ms: float = 50.0,
    cascade_iterations: int = 10,
    n_jobs: int = 1,
) -> list[CandidateEvent]:
    """Candidate events over all channels, sorted by (channel, time)."""
    fs = recording.sampling_rate_hz
    table = build_wavelet_table(wavelet, cascade_iterations)
    scales = select_scales(fs) if scales is None else list(scales)
    kernels = [scale_kernel(table, a, fs, spec.window_s) for a in scales]
    lobe_sep = table.lobe_separation
    args = [(lab, x, fs, kernels, k, spec, min_separation_ms, lobe_sep) for lab, x in recording.channels]
    if n_jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_channel_candidates, *zip(*args)))
    else:
        parts = [_channel_candidates(*a) for a in args]
    out = [ev for part in parts for ev in part]
    out.sort(key=lambda e: (e.channel, e.peak_sample))
    return out
