import numpy as np
import pytest

from eegspike.exceptions import DegenerateEventError
from eegspike.mimetic import (
    FEATURE_NAMES,
    decompose_halfwaves,
    extract_events,
    extract_features,
    snap_window_ms,
    write_features,
)
from eegspike.signal_io import Recording
from eegspike.synth import biphasic_pulse

from conftest import triangle


def test_triangle_boundaries(tri):
    pair = decompose_halfwaves(tri, 1000.0, 20)
    assert (pair.start_sample, pair.peak_sample, pair.end_sample) == (0, 20, 60)
    assert pair.peak_polarity == "positive"


def test_triangle_features(tri):
    f = extract_features(decompose_halfwaves(tri, 1000.0, 20), tri, 1000.0)
    assert (f.amp1_uv, f.amp2_uv, f.durA_ms, f.durB_ms, f.dur1_ms) == (100.0, 100.0, 20.0, 40.0, 60.0)
    assert f.slope1 == pytest.approx(5.0) and f.slope2 == pytest.approx(2.5)
    assert f.amp_baseline_uv == pytest.approx(100.0)
    # steepest differences: first of the rise and last of the fall
    assert f.dur2_ms == 59.0
    assert all(type(v) is float for v in f)


def test_inverted_triangle(tri):
    pair = decompose_halfwaves(-tri, 1000.0, 22)
    assert (pair.start_sample, pair.peak_sample, pair.end_sample) == (0, 20, 60)
    assert pair.peak_polarity == "negative"
    f = extract_features(pair, -tri, 1000.0)
    assert (f.amp1_uv, f.amp2_uv) == (100.0, 100.0)


def test_flat_signal_is_degenerate():
    with pytest.raises(DegenerateEventError):
        decompose_halfwaves(np.zeros(200), 1000.0, 100)


def test_endless_ramp_is_degenerate():
    x = np.concatenate([np.arange(100.0), 100 - np.arange(1, 1000) * 0.01])
    with pytest.raises(DegenerateEventError):
        decompose_halfwaves(x, 1000.0, 99)


def test_time_dilation():
    a = triangle(1000.0, 20, 40, total_ms=400, lead_ms=50)
    b = triangle(1000.0, 40, 80, total_ms=400, lead_ms=50)
    fa = extract_features(decompose_halfwaves(a, 1000.0, 70), a, 1000.0)
    fb = extract_features(decompose_halfwaves(b, 1000.0, 90), b, 1000.0)
    assert (fb.durA_ms, fb.durB_ms, fb.dur1_ms) == (2 * fa.durA_ms, 2 * fa.durB_ms, 2 * fa.dur1_ms)
    assert (fb.amp1_uv, fb.amp2_uv) == (fa.amp1_uv, fa.amp2_uv)
    assert fb.slope1 == pytest.approx(fa.slope1 / 2) and fb.slope2 == pytest.approx(fa.slope2 / 2)


def _noisy_pulse(seed, offset=0.0, gain=1.0):
    rng = np.random.default_rng(seed)
    off, y = biphasic_pulse(150.0, 0.06, 200.0)
    x = rng.normal(0, 5, 600)
    x[300 + off] += y
    return gain * x + offset


@pytest.mark.parametrize("seed", range(5))
def test_dc_offset_invariance(seed):
    x = _noisy_pulse(seed)
    y = _noisy_pulse(seed, offset=1234.5)
    fx = extract_features(decompose_halfwaves(x, 200.0, 300), x, 200.0)
    fy = extract_features(decompose_halfwaves(y, 200.0, 300), y, 200.0)
    assert fy.amp1_uv == pytest.approx(fx.amp1_uv, abs=1e-9)
    assert fy.amp2_uv == pytest.approx(fx.amp2_uv, abs=1e-9)
    assert fy.amp_baseline_uv == pytest.approx(fx.amp_baseline_uv, rel=1e-6)
    assert fy[3:7] == fx[3:7]


@pytest.mark.parametrize("gain", [0.5, 3.0])
def test_amplitude_scaling(gain):
    x = _noisy_pulse(1)
    fx = extract_features(decompose_halfwaves(x, 200.0, 300), x, 200.0)
    y = _noisy_pulse(1, gain=gain)
    fy = extract_features(decompose_halfwaves(y, 200.0, 300), y, 200.0)
    for name in ("amp1_uv", "amp2_uv", "amp_baseline_uv", "slope1", "slope2"):
        assert getattr(fy, name) == pytest.approx(gain * getattr(fx, name))
    assert fy[3:7] == fx[3:7]


@pytest.mark.parametrize("seed", range(10))
def test_dur1_is_sum_of_halfwaves(seed):
    x = _noisy_pulse(seed)
    f = extract_features(decompose_halfwaves(x, 200.0, 300), x, 200.0)
    assert abs(f.dur1_ms - (f.durA_ms + f.durB_ms)) <= 5.0


@pytest.mark.parametrize("rise_ms, fall_ms", [(23, 37), (31, 44), (18, 52)])
def test_quantisation_at_100_hz(rise_ms, fall_ms):
    fine = triangle(10_000.0, rise_ms, fall_ms, total_ms=300, lead_ms=50)
    x = fine[::100]  # 100 samples/s
    p = int(np.argmax(x))
    f = extract_features(decompose_halfwaves(x, 100.0, p), x, 100.0)
    assert abs(f.durA_ms - rise_ms) <= 10.0 and abs(f.durB_ms - fall_ms) <= 10.0


def test_small_ripple_on_flank_is_stepped_over():
    x = triangle(200.0, 40, 60, total_ms=600, lead_ms=200)
    p = int(np.argmax(x))
    x[p - 4] += 30.0  # ripple: the rise pauses for a sample
    pair = decompose_halfwaves(x, 200.0, p)
    assert pair.start_sample == 40


def test_snap_picks_prominent_extremum():
    x = triangle(200.0, 30, 50, total_ms=600, lead_ms=200)
    x[30] = 5.0  # a small blip well away
    p = int(np.argmax(x))
    assert decompose_halfwaves(x, 200.0, p + 3).peak_sample == p


def test_snap_window_grows_with_scale():
    assert snap_window_ms(4.0, 200.0, 0.5) == 25.0
    assert snap_window_ms(20.0, 200.0, 0.5) == pytest.approx(55.0)


def test_extract_events_drops_degenerate_and_dedups(tmp_path):
    from eegspike.detector import CandidateEvent

    x = np.zeros(2000)
    off, y = biphasic_pulse(200.0, 0.05, 200.0)
    x[1000 + off] += y
    rec = Recording(200.0, ("C01",), x[None, :])
    cands = [
        CandidateEvent("C01", 1000 / 200, 1000, 4.0, 10.0, 1.0),
        CandidateEvent("C01", 1002 / 200, 1002, 10.0, 20.0, 1.0),
        CandidateEvent("C01", 200 / 200, 200, 4.0, 1.0, 1.0),  # flat region
    ]
    evs = extract_events(rec, cands, 0.5)
    assert len(evs) == 1 and evs[0].pair.peak_sample == 1000 and evs[0].candidate.coefficient == 20.0
    write_features(evs, 200.0, tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "channel,time_s," + ",".join(FEATURE_NAMES) and len(lines) == 2
