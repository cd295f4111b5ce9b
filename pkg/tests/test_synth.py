import numpy as np
import pytest

from eegspike.exceptions import ConfigError
from eegspike.mimetic import decompose_halfwaves, extract_features
from eegspike.synth import (
    UNDERSHOOT,
    EventSpec,
    SynthSpec,
    biphasic_pulse,
    default_corpus,
    generate,
    preset,
)


def small_spec(seed=1, **kw):
    events = (
        EventSpec("spike", 6.0, (100.0, 200.0), (30.0, 60.0)),
        EventSpec("emg_burst", 2.0, (60.0, 100.0), (100.0, 200.0)),
    )
    return SynthSpec(duration_s=120.0, channels=3, seed=seed, alpha_uv=5.0, events=events, **kw)


def test_same_seed_bit_identical():
    r1, a1 = generate(small_spec())
    r2, a2 = generate(small_spec())
    assert r1.data.tobytes() == r2.data.tobytes() and a1.marks == a2.marks


def test_different_seed_differs():
    r1, _ = generate(small_spec(1))
    r2, _ = generate(small_spec(2))
    assert not np.array_equal(r1.data, r2.data)


def test_zero_events_no_annotations():
    rec, ann = generate(SynthSpec(duration_s=10.0, channels=2))
    assert len(ann) == 0 and rec.data.shape == (2, 2000)


def test_counting_500_spikes():
    spec = SynthSpec(duration_s=3600.0, channels=8, seed=4, events=(EventSpec("spike", 500 / 60, (80, 200), (20, 70)),))
    _, ann = generate(spec)
    assert len(ann) == 500


def test_only_spikes_and_sharp_waves_are_annotated():
    spec = small_spec()
    _, ann = generate(spec)
    assert len(ann) == 12 and {m.kind for m in ann} == {"spike"}


def test_marks_respect_minimum_spacing():
    _, ann = generate(small_spec())
    for ts in ann.by_channel().values():
        assert np.all(np.diff(ts) >= 0.3)


def test_rate_too_high_raises():
    spec = SynthSpec(duration_s=10.0, channels=1, events=(EventSpec("sharp", 600.0, (100, 200), (150, 200)),))
    with pytest.raises(ConfigError):
        generate(spec)


@pytest.mark.parametrize("template, dur", [("spike", (10.0, 60.0)), ("sharp", (50.0, 150.0)), ("wave", (80, 90))])
def test_event_spec_validation(template, dur):
    with pytest.raises(ConfigError):
        EventSpec(template, 1.0, (50.0, 100.0), dur)


def test_from_dict_round_trip():
    spec = small_spec()
    assert SynthSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ConfigError):
        SynthSpec.from_dict({"events": [{"template": "spike"}]})


@pytest.mark.parametrize("amp, dur_ms", [(100.0, 25.0), (250.0, 60.0), (180.0, 120.0), (300.0, 190.0)])
def test_isolated_pulse_features_match_parameters(amp, dur_ms):
    fs = 1000.0
    off, y = biphasic_pulse(amp, dur_ms / 1000.0, fs)
    x = np.zeros(2000)
    x[1000 + off] += y
    f = extract_features(decompose_halfwaves(x, fs, 1000), x, fs)
    assert f.amp1_uv == pytest.approx(amp, rel=0.1)
    assert f.amp2_uv == pytest.approx((1 + UNDERSHOOT) * amp, rel=0.1)
    assert f.dur1_ms == pytest.approx(dur_ms, rel=0.1)


def test_default_corpus_shape():
    corpus = default_corpus()
    assert len({s.seed for s in corpus}) == 3
    first = corpus[0]
    assert 75 <= first.duration_s / 60 <= 85
    n_marks = sum(round(e.rate_per_min * first.duration_s / 60) for e in first.events if e.template in ("spike", "sharp"))
    assert 590 <= n_marks <= 610
    assert preset("corpus-0") == first and preset("medium") == first
    with pytest.raises(ConfigError):
        preset("nope")


def test_corpus_annotations_regenerate_identically():
    spec = preset("easy")
    short = SynthSpec.from_dict({**spec.to_dict(), "duration_s": 300.0})
    assert generate(short)[1].marks == generate(short)[1].marks
