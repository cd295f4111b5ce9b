"""Recording, annotation and detection file formats.

EEGR recording layout::

    EEGR1\\n
    {"fs": 200.0, "channels": ["Fp1", ...], "n_samples": 2000, "unit": "uV", "scale": 1.0}\\n
    <n_samples * n_channels little-endian float32, channel-interleaved>

A stored sample ``s`` decodes to ``s * scale`` microvolts.  Annotation and
detection files are plain CSV with a header row.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .exceptions import FormatError, IntegrityError, RangeError

MAGIC = b"EEGR1"
ANNOTATION_HEADER = ["channel", "time_s", "kind"]
DETECTION_HEADER = ["channel", "time_s", "score", "class", "rejected_by"]
DETECTION_CLASSES = ("non_epileptiform", "possible", "epileptiform")


@dataclass(frozen=True, eq=False)
class Recording:
    """Multi-channel EEG sampled at ``sampling_rate_hz``, values in µV.

    ``data`` has shape ``(n_channels, n_samples)``.
    """

    sampling_rate_hz: float
    labels: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self):
        fs = float(self.sampling_rate_hz)
        if not math.isfinite(fs) or fs <= 0:
            raise RangeError(f"sampling rate must be positive, got {self.sampling_rate_hz!r}")
        labels = tuple(str(lab) for lab in self.labels)
        if len(set(labels)) != len(labels):
            raise IntegrityError(f"duplicate channel labels in {labels}")
        data = self.data
        if not isinstance(data, np.ndarray):
            lengths = {len(ch) for ch in data}
            if len(lengths) > 1:
                raise IntegrityError(f"channels have unequal sample counts: {sorted(lengths)}")
            data = np.asarray(data, dtype=float)
        data = np.asarray(data, dtype=float)
        if data.ndim == 1 and len(labels) == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise IntegrityError(f"data must be 2-D (channels x samples), got shape {data.shape}")
        if data.shape[0] != len(labels):
            raise IntegrityError(f"{data.shape[0]} channels of data but {len(labels)} labels")
        object.__setattr__(self, "sampling_rate_hz", fs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz

    @property
    def channels(self) -> list[tuple[str, np.ndarray]]:
        return list(zip(self.labels, self.data))

    def channel(self, label: str) -> np.ndarray:
        return self.data[self.labels.index(label)]

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.sampling_rate_hz == other.sampling_rate_hz
            and self.labels == other.labels
            and np.array_equal(self.data, other.data)
        )


class Mark(NamedTuple):
    channel: str
    time_s: float
    kind: str = "spike"


@dataclass
class AnnotationSet:
    """Expert marks, kept sorted by (channel, time_s)."""

    marks: list[Mark] = field(default_factory=list)

    def __post_init__(self):
        marks = [Mark(str(m[0]), float(m[1]), str(m[2]) if len(m) > 2 else "spike") for m in self.marks]
        for m in marks:
            if not math.isfinite(m.time_s) or m.time_s < 0:
                raise RangeError(f"mark time must be finite and >= 0, got {m.time_s!r}")
        self.marks = sorted(marks, key=lambda m: (m.channel, m.time_s))

    def __len__(self):
        return len(self.marks)

    def __iter__(self) -> Iterator[Mark]:
        return iter(self.marks)

    @property
    def labels(self) -> set[str]:
        return {m.channel for m in self.marks}

    def by_channel(self) -> dict[str, np.ndarray]:
        out: dict[str, list[float]] = {}
        for m in self.marks:
            out.setdefault(m.channel, []).append(m.time_s)
        return {ch: np.asarray(ts) for ch, ts in out.items()}


class Detection(NamedTuple):
    channel: str
    time_s: float
    score: float
    label: str
    rejected_by: str | None = None

    @property
    def positive(self) -> bool:
        return self.label == "epileptiform"


@dataclass
class DetectionList:
    """Classified events, sorted by (channel, time_s)."""

    events: list[Detection] = field(default_factory=list)

    def __post_init__(self):
        for ev in self.events:
            if not 0.0 <= ev.score <= 1.0:
                raise RangeError(f"score must lie in [0, 1], got {ev.score!r}")
            if ev.label not in DETECTION_CLASSES:
                raise RangeError(f"unknown class {ev.label!r}")
        self.events = sorted(self.events, key=lambda e: (e.channel, e.time_s))

    def __len__(self):
        return len(self.events)

    def __iter__(self) -> Iterator[Detection]:
        return iter(self.events)

    @property
    def labels(self) -> set[str]:
        return {e.channel for e in self.events}

    def positives(self) -> list[Detection]:
        return [e for e in self.events if e.positive]


# -- EEGR ---------------------------------------------------------------------


def write_recording(rec: Recording, path) -> None:
    """Write ``rec`` as EEGR.  Samples are stored as float32."""
    header = {
        "fs": rec.sampling_rate_hz,
        "channels": list(rec.labels),
        "n_samples": rec.n_samples,
        "unit": "uV",
        "scale": 1.0,
    }
    payload = np.ascontiguousarray(rec.data.T, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(MAGIC + b"\n")
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(payload.tobytes())


def read_recording(path) -> Recording:
    """Read an EEGR file into a :class:`Recording` (float64, µV)."""
    path = Path(path)
    raw = path.read_bytes()
    nl1 = raw.find(b"\n")
    if nl1 < 0 or raw[:nl1] != MAGIC:
        raise FormatError("missing EEGR1 magic line", path=path, line=1, offset=0)
    nl2 = raw.find(b"\n", nl1 + 1)
    if nl2 < 0:
        raise FormatError("unterminated header line", path=path, line=2, offset=nl1 + 1)
    try:
        header = json.loads(raw[nl1 + 1 : nl2].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON ({exc})", path=path, line=2, offset=nl1 + 1) from None
    if not isinstance(header, dict):
        raise FormatError("header must be a JSON object", path=path, line=2, offset=nl1 + 1)
    missing = {"fs", "channels", "n_samples"} - header.keys()
    if missing:
        raise FormatError(f"header lacks keys {sorted(missing)}", path=path, line=2, offset=nl1 + 1)
    unit = header.get("unit", "uV")
    if unit != "uV":
        raise FormatError(f"unsupported unit {unit!r}", path=path, line=2, offset=nl1 + 1)
    fs, labels, n = header["fs"], header["channels"], header["n_samples"]
    scale = header.get("scale", 1.0)
    if (
        not isinstance(labels, list)
        or not labels
        or not all(isinstance(lab, str) for lab in labels)
        or not isinstance(n, int)
        or isinstance(n, bool)
        or n < 0
        or not isinstance(fs, (int, float))
        or not isinstance(scale, (int, float))
    ):
        raise FormatError("bad header field types", path=path, line=2, offset=nl1 + 1)
    if not fs > 0:
        raise FormatError(f"fs must be positive, got {fs}", path=path, line=2, offset=nl1 + 1)

    start = nl2 + 1
    body = len(raw) - start
    expected = n * len(labels) * 4
    if body != expected:
        raise IntegrityError(
            f"{path}: payload at offset {start} holds {body} bytes, expected {expected} "
            f"({len(labels)} channels x {n} samples x 4)"
        )
    samples = np.frombuffer(raw, dtype="<f4", offset=start, count=n * len(labels))
    data = samples.reshape(n, len(labels)).T.astype(np.float64)
    if scale != 1.0:
        data = data * float(scale)
    return Recording(float(fs), tuple(labels), data)


# -- CSV helpers -------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _parse_float(text: str, path, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{column} is not numeric: {text!r}", path=path, line=line) from None
    if not math.isfinite(value):
        raise FormatError(f"{column} is not finite: {text!r}", path=path, line=line)
    return value


def _read_rows(path, header: Sequence[str]):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != list(header):
            raise FormatError(f"expected header {','.join(header)}", path=path, line=1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"expected {len(header)} fields, got {len(row)}", path=path, line=reader.line_num
                )
            yield reader.line_num, [c.strip() for c in row]


def read_annotations(path) -> AnnotationSet:
    """Parse an annotation CSV (``channel,time_s,kind``)."""
    marks = []
    for line, (channel, time_text, kind) in _read_rows(path, ANNOTATION_HEADER):
        t = _parse_float(time_text, path, line, "time_s")
        if t < 0:
            raise RangeError(f"{path}:line {line}: negative time {t}")
        marks.append(Mark(channel, t, kind))
    return AnnotationSet(marks)


def write_annotations(ann: AnnotationSet, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ANNOTATION_HEADER)
    for m in ann:
        writer.writerow([m.channel, _fmt(m.time_s), m.kind])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_detections(path) -> DetectionList:
    """Parse a detection CSV written by :func:`write_detections`."""
    events = []
    for line, (channel, t, score, label, rejected) in _read_rows(path, DETECTION_HEADER):
        time_s = _parse_float(t, path, line, "time_s")
        if time_s < 0:
            raise RangeError(f"{path}:line {line}: negative time {time_s}")
        sc = _parse_float(score, path, line, "score")
        if not 0.0 <= sc <= 1.0:
            raise RangeError(f"{path}:line {line}: score {sc} outside [0, 1]")
        if label not in DETECTION_CLASSES:
            raise FormatError(f"unknown class {label!r}", path=path, line=line)
        events.append(Detection(channel, time_s, sc, label, rejected or None))
    return DetectionList(events)


def write_detections(d: DetectionList, path) -> None:
    """Emit ``d`` as CSV with six decimals; output bytes depend only on ``d``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DETECTION_HEADER)
    for ev in d:
        writer.writerow([ev.channel, _fmt(ev.time_s), _fmt(ev.score), ev.label, ev.rejected_by or ""])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
