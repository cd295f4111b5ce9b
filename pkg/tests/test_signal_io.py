import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegspike.exceptions import FormatError, IntegrityError, RangeError
from eegspike.signal_io import (
    AnnotationSet,
    Detection,
    DetectionList,
    Mark,
    Recording,
    read_annotations,
    read_detections,
    read_recording,
    write_annotations,
    write_detections,
    write_recording,
)


def test_recording_duration_from_header(tmp_path):
    rec = Recording(200.0, ("Fp1",), np.zeros((1, 2000)))
    write_recording(rec, tmp_path / "r.eegr")
    back = read_recording(tmp_path / "r.eegr")
    assert back.duration_s == 10.0
    assert back.labels == ("Fp1",)


def test_recording_roundtrip_bit_exact(tmp_path, small_recording):
    write_recording(small_recording, tmp_path / "r.eegr")
    back = read_recording(tmp_path / "r.eegr")
    assert back == small_recording
    assert np.array_equal(back.data, small_recording.data)


@settings(max_examples=40, deadline=None)
@given(
    n_ch=st.integers(1, 4),
    n=st.integers(0, 300),
    fs=st.sampled_from([100.0, 200.0, 256.0, 512.5]),
    seed=st.integers(0, 2**32 - 1),
)
def test_recording_roundtrip_property(tmp_path_factory, n_ch, n, fs, seed):
    data = np.random.default_rng(seed).normal(0, 100, (n_ch, n)).astype(np.float32).astype(float)
    rec = Recording(fs, tuple(f"ch{i}" for i in range(n_ch)), data)
    p = tmp_path_factory.mktemp("rt") / "r.eegr"
    write_recording(rec, p)
    assert read_recording(p) == rec


def test_unequal_channel_payload_is_integrity_error(tmp_path, small_recording):
    p = tmp_path / "r.eegr"
    write_recording(small_recording, p)
    p.write_bytes(p.read_bytes()[:-4])  # one sample short
    with pytest.raises(IntegrityError):
        read_recording(p)


def test_ragged_channels_rejected():
    with pytest.raises(IntegrityError):
        Recording(200.0, ("a", "b"), [np.zeros(3), np.zeros(4)])


@pytest.mark.parametrize(
    "blob, line",
    [
        (b"NOPE\n{}\n", 1),
        (b"EEGR1\n{not json\n", 2),
        (b"EEGR1\n{\"fs\": 200}\n", 2),
        (b"EEGR1\n{\"fs\": -1, \"channels\": [\"a\"], \"n_samples\": 0}\n", 2),
    ],
)
def test_malformed_header_reports_line(tmp_path, blob, line):
    p = tmp_path / "bad.eegr"
    p.write_bytes(blob)
    with pytest.raises(FormatError) as exc:
        read_recording(p)
    assert exc.value.line == line


def test_annotation_single_row(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("channel,time_s,kind\nFp1,12.345,spike\n")
    ann = read_annotations(p)
    assert list(ann) == [Mark("Fp1", 12.345, "spike")]


def test_annotation_rows_are_sorted(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("channel,time_s,kind\nFp2,1.0,spike\nFp1,5.0,sharp\nFp1,2.0,spike\n")
    ann = read_annotations(p)
    assert [(m.channel, m.time_s) for m in ann] == [("Fp1", 2.0), ("Fp1", 5.0), ("Fp2", 1.0)]


def test_annotation_negative_time_is_range_error(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("channel,time_s,kind\nFp1,-1.0,spike\n")
    with pytest.raises(RangeError):
        read_annotations(p)


def test_annotation_bad_number_reports_line(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("channel,time_s,kind\nFp1,1.0,spike\nFp1,abc,spike\n")
    with pytest.raises(FormatError) as exc:
        read_annotations(p)
    assert exc.value.line == 3


def test_empty_detections_header_only(tmp_path):
    p = tmp_path / "d.csv"
    write_detections(DetectionList([]), p)
    assert p.read_text() == "channel,time_s,score,class,rejected_by\n"


def test_one_detection_one_row(tmp_path):
    p = tmp_path / "d.csv"
    write_detections(DetectionList([Detection("Fp1", 3.2, 0.91, "epileptiform")]), p)
    assert p.read_text().splitlines()[1] == "Fp1,3.200000,0.910000,epileptiform,"


labels = st.sampled_from(["Fp1", "Fp2", "C3", "O1"])
times = st.integers(0, 10**8).map(lambda i: i / 1e6)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            labels,
            times,
            st.integers(0, 10**6).map(lambda i: i / 1e6),
            st.sampled_from(["non_epileptiform", "possible", "epileptiform"]),
            st.sampled_from([None, "a", "b", "c", "d", "e"]),
        ),
        max_size=30,
    )
)
def test_detection_roundtrip_property(tmp_path_factory, rows):
    d = DetectionList([Detection(*r) for r in rows])
    p = tmp_path_factory.mktemp("det") / "d.csv"
    write_detections(d, p)
    assert read_detections(p).events == d.events


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(labels, times, st.sampled_from(["spike", "sharp"])), max_size=30))
def test_annotation_roundtrip_property(tmp_path_factory, rows):
    ann = AnnotationSet([Mark(*r) for r in rows])
    p = tmp_path_factory.mktemp("ann") / "a.csv"
    write_annotations(ann, p)
    assert read_annotations(p).marks == ann.marks


def test_detection_unknown_class_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("channel,time_s,score,class,rejected_by\nFp1,1.0,0.5,maybe,\n")
    with pytest.raises(FormatError) as exc:
        read_detections(p)
    assert exc.value.line == 2
