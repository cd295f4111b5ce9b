"""Seeded synthetic EEG with injected epileptiform events and artifact mimics.

Background is band-limited 1/f^alpha noise plus an optional alpha rhythm.
Spikes and sharp waves are annotated at their peak sample; K complexes, EMG
bursts and EOG ramps are injected without annotation so that they surface
as false positives unless rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .exceptions import ConfigError
from .signal_io import AnnotationSet, Mark, Recording

TEMPLATES = ("spike", "sharp", "k_complex", "emg_burst", "eog_ramp")
ANNOTATED = ("spike", "sharp")

# duration ranges (ms) that define each annotated class
SPIKE_MS = (20.0, 70.0)
SHARP_MS = (70.0, 200.0)

RISE_FRACTION = 0.4
UNDERSHOOT = 0.3
RECOVERY_FACTOR = 1.5


@dataclass(frozen=True)
class EventSpec:
    template: str
    rate_per_min: float
    amplitude_uv: tuple[float, float]
    duration_ms: tuple[float, float]

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ConfigError(f"unknown template {self.template!r}")
        if self.rate_per_min < 0:
            raise ConfigError("rate_per_min must be >= 0")
        lo, hi = self.amplitude_uv
        if not 0 < lo <= hi:
            raise ConfigError(f"bad amplitude range {self.amplitude_uv}")
        lo, hi = self.duration_ms
        if not 0 < lo <= hi:
            raise ConfigError(f"bad duration range {self.duration_ms}")
        if self.template == "spike" and not (SPIKE_MS[0] <= lo and hi <= SPIKE_MS[1]):
            raise ConfigError(f"spike durations must lie in {SPIKE_MS} ms")
        if self.template == "sharp" and not (SHARP_MS[0] <= lo and hi <= SHARP_MS[1]):
            raise ConfigError(f"sharp-wave durations must lie in {SHARP_MS} ms")


@dataclass(frozen=True)
class SynthSpec:
    fs: float = 200.0
    duration_s: float = 600.0
    channels: int = 4
    seed: int = 0
    noise_uv: float = 20.0
    noise_exponent: float = 1.0
    alpha_uv: float = 0.0
    alpha_hz: float = 10.0
    events: tuple[EventSpec, ...] = ()
    min_spacing_s: float = 0.3
    edge_margin_s: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.fs > 0 or not self.duration_s > 0:
            raise ConfigError("fs and duration_s must be positive")
        if int(self.channels) != self.channels or self.channels < 1:
            raise ConfigError("channels must be a positive integer")
        if self.noise_uv < 0 or self.alpha_uv < 0:
            raise ConfigError("noise_uv and alpha_uv must be >= 0")
        object.__setattr__(
            self, "events", tuple(e if isinstance(e, EventSpec) else EventSpec(**e) for e in self.events)
        )

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        try:
            events = tuple(
                EventSpec(
                    e["template"],
                    float(e["rate_per_min"]),
                    tuple(map(float, e["amplitude_uv"])),
                    tuple(map(float, e["duration_ms"])),
                )
                for e in d.pop("events", ())
            )
            return cls(events=events, **d)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid synth spec: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


# -- waveform templates --------------------------------------------------------
# each returns (offsets, values): integer sample offsets relative to the peak


def _raised(t, d):
    return 0.5 * (1.0 + np.cos(np.pi * t / d))


def biphasic_pulse(amplitude, duration_s, fs, rise_fraction=RISE_FRACTION, undershoot=UNDERSHOOT):
    """Raised-cosine rise to ``amplitude``, faster than the fall to ``-undershoot * amplitude``,
    then a slow recovery to zero.  The peak sits on offset 0."""
    d_a = rise_fraction * duration_s
    d_b = duration_s - d_a
    d_c = RECOVERY_FACTOR * duration_s
    lo = -int(math.ceil(d_a * fs))
    hi = int(math.ceil((d_b + d_c) * fs))
    off = np.arange(lo, hi + 1)
    t = off / fs
    y = np.zeros(len(t))
    a = (t >= -d_a) & (t <= 0)
    y[a] = amplitude * _raised(t[a], d_a)
    b = (t > 0) & (t <= d_b)
    y[b] = -undershoot * amplitude + (1 + undershoot) * amplitude * _raised(t[b], d_b)
    c = (t > d_b) & (t <= d_b + d_c)
    y[c] = -undershoot * amplitude * _raised(t[c] - d_b, d_c)
    return off, y


def emg_burst(amplitude, duration_s, fs, rng):
    freq = rng.uniform(0.25, 0.4) * fs
    n = max(3, int(round(duration_s * fs)))
    t = np.arange(n) / fs
    env = np.hanning(n)
    y = amplitude * env * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
    off = np.arange(n) - n // 2
    return off, y


def eog_ramp(amplitude, duration_s, fs):
    n_up = max(2, int(round(duration_s * fs)))
    n_down = 2 * n_up
    up = amplitude * (1 - _raised(np.arange(n_up + 1) / fs, duration_s))
    down = amplitude * _raised(np.arange(1, n_down + 1) / fs, 2 * duration_s)
    y = np.concatenate([up, down])
    off = np.arange(len(y)) - n_up
    return off, y


def make_event(template, amplitude, duration_s, fs, rng):
    if template in ("spike", "sharp"):
        return biphasic_pulse(amplitude, duration_s, fs)
    if template == "k_complex":
        return biphasic_pulse(amplitude, duration_s, fs, rise_fraction=0.35, undershoot=0.8)
    if template == "emg_burst":
        return emg_burst(amplitude, duration_s, fs, rng)
    if template == "eog_ramp":
        return eog_ramp(amplitude, duration_s, fs)
    raise ConfigError(f"unknown template {template!r}")


# -- background ---------------------------------------------------------------


def colored_noise(n, fs, exponent, rng, low_cut_hz=0.5):
    """Unit-variance noise with power spectrum ~ 1/f^exponent above ``low_cut_hz``."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    f = np.fft.rfftfreq(n, 1.0 / fs)
    gain = np.zeros_like(f)
    nz = f > 0
    gain[nz] = np.maximum(f[nz], low_cut_hz) ** (-exponent / 2.0)
    gain[nz] *= 1.0 / (1.0 + (low_cut_hz / f[nz]) ** 4)  # 2nd-order high-pass roll-off
    x = np.fft.irfft(spec * gain, n)
    sd = x.std()
    return x / sd if sd > 0 else x


def _place(extents_before, extents_after, usable_s, margin_s, gap_s, fs, rng):
    """Uniform placement of non-overlapping events with at least ``gap_s`` between them."""
    n = len(extents_before)
    if n == 0:
        return np.array([], dtype=int)
    total = float(np.sum(extents_before) + np.sum(extents_after))
    free = usable_s - 2 * margin_s - total - (n - 1) * gap_s
    if free < 0:
        raise ConfigError("event rate too high for the minimum-spacing constraint")
    u = np.sort(rng.uniform(0.0, free, n))
    cursor = margin_s + np.concatenate([[0.0], np.cumsum(extents_before[:-1] + extents_after[:-1] + gap_s)])
    peaks_s = cursor + u + extents_before
    return np.round(peaks_s * fs).astype(int)


def generate(spec: SynthSpec) -> tuple[Recording, AnnotationSet]:
    """Deterministic recording + annotations for ``spec``."""
    fs = spec.fs
    n = int(round(spec.duration_s * fs))
    root = np.random.SeedSequence(spec.seed)
    event_seq, *channel_seqs = root.spawn(1 + spec.channels)

    data = np.empty((spec.channels, n))
    for c, seq in enumerate(channel_seqs):
        rng = np.random.default_rng(seq)
        x = spec.noise_uv * colored_noise(n, fs, spec.noise_exponent, rng)
        if spec.alpha_uv > 0:
            t = np.arange(n) / fs
            x += spec.alpha_uv * np.sin(2 * np.pi * spec.alpha_hz * t + rng.uniform(0, 2 * np.pi))
        data[c] = x

    rng = np.random.default_rng(event_seq)
    minutes = spec.duration_s / 60.0
    drawn = []
    for ev in spec.events:
        count = int(round(ev.rate_per_min * minutes))
        amps = rng.uniform(*ev.amplitude_uv, count)
        durs = rng.uniform(*ev.duration_ms, count) / 1000.0
        signs = rng.choice([-1.0, 1.0], count)
        chans = rng.integers(0, spec.channels, count)
        for i in range(count):
            off, y = make_event(ev.template, signs[i] * amps[i], durs[i], fs, rng)
            drawn.append((int(chans[i]), ev.template, off, y))

    labels = tuple(f"C{i + 1:02d}" for i in range(spec.channels))
    marks = []
    for c in range(spec.channels):
        mine = [d for d in drawn if d[0] == c]
        if not mine:
            continue
        order = rng.permutation(len(mine))
        mine = [mine[i] for i in order]
        before = np.array([-d[2][0] / fs for d in mine])
        after = np.array([d[2][-1] / fs for d in mine])
        peaks = _place(before, after, spec.duration_s, spec.edge_margin_s, spec.min_spacing_s, fs, rng)
        for (_, template, off, y), p in zip(mine, peaks):
            idx = p + off
            data[c, idx] += y
            if template in ANNOTATED:
                marks.append(Mark(labels[c], p / fs, template))
    return Recording(fs, labels, data), AnnotationSet(marks)


def _corpus_spec(name, seed, minutes, marks, noise_uv, alpha_uv, amp, artifact_rate, channels=16):
    n_sharp = marks // 4
    n_spike = marks - n_sharp
    events = (
        EventSpec("spike", n_spike / minutes, amp, (25.0, 70.0)),
        EventSpec("sharp", n_sharp / minutes, amp, (70.0, 180.0)),
        EventSpec("k_complex", artifact_rate, (120.0, 250.0), (500.0, 900.0)),
        EventSpec("emg_burst", 2 * artifact_rate, (60.0, 150.0), (100.0, 300.0)),
        EventSpec("eog_ramp", artifact_rate, (100.0, 300.0), (200.0, 400.0)),
    )
    return SynthSpec(
        fs=200.0,
        duration_s=minutes * 60.0,
        channels=channels,
        seed=seed,
        noise_uv=noise_uv,
        alpha_uv=alpha_uv,
        events=events,
        name=name,
    )


def default_corpus() -> list[SynthSpec]:
    """Three fixed, seeded specs of 75-85 min with 300-600 marks each.

    Index 0 is the medium-difficulty record, 1 the easy and 2 the hard one.
    """
    return [
        _corpus_spec("medium", 3, 80.0, 601, noise_uv=15.0, alpha_uv=8.0, amp=(90.0, 320.0), artifact_rate=1.5),
        _corpus_spec("easy", 5, 85.0, 387, noise_uv=10.0, alpha_uv=5.0, amp=(100.0, 350.0), artifact_rate=1.0),
        _corpus_spec("hard", 6, 75.0, 320, noise_uv=20.0, alpha_uv=12.0, amp=(80.0, 300.0), artifact_rate=2.0),
    ]


def preset(name: str) -> SynthSpec:
    """Look up a corpus spec by ``corpus-<i>`` or by difficulty name."""
    corpus = default_corpus()
    for i, spec in enumerate(corpus):
        if name in (f"corpus-{i}", spec.name):
            return spec
    raise ConfigError(f"unknown preset {name!r}")
