"""Pipeline configuration file.

INI-style ``key = value`` lines grouped in sections, ``#`` or ``;``
comments.  Every key is optional; unknown sections or keys are errors::

    [wavelet]
    name = db2                 # db2 db4 db5 coif4 sym8
    scales = 4, 10, 20, 30     # samples; omit to rescale the 200 Hz set
    cascade_iterations = 10

    [detector]
    k = 3.0
    window_s = 10.0
    hop_s = 9.5
    min_separation_ms = 50

    [fuzzy]
    rulebase = my.rules        # relative to the config file; omit for default
    threshold = 0.8

    [postclass]
    enable = a, b, c, d, e     # empty disables every rule

    [eval]
    tolerance_ms = 50
    thresholds = 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .evaluation import DEFAULT_THRESHOLDS, DEFAULT_TOLERANCE_MS
from .exceptions import ConfigError
from .fuzzy import EPILEPTIFORM_THRESHOLD
from .postclass import RULE_IDS, parse_enabled
from .wavelet import WAVELETS


@dataclass(frozen=True)
class PipelineConfig:
    wavelet: str = "db2"
    scales: tuple[float, ...] | None = None
    cascade_iterations: int = 10
    k: float = 3.0
    window_s: float = 10.0
    hop_s: float = 9.5
    min_separation_ms: float = 50.0
    rulebase: str | None = None
    threshold: float = EPILEPTIFORM_THRESHOLD
    postclass_enable: frozenset[str] = field(default_factory=lambda: frozenset(RULE_IDS))
    tolerance_ms: float = DEFAULT_TOLERANCE_MS
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        if self.wavelet not in WAVELETS:
            raise ConfigError(f"unknown wavelet {self.wavelet!r}; choose from {', '.join(WAVELETS)}")
        if self.scales is not None and (not self.scales or any(not a > 0 for a in self.scales)):
            raise ConfigError("scales must be a non-empty list of positive numbers")
        if self.cascade_iterations < 6:
            raise ConfigError("cascade_iterations must be >= 6")
        for name in ("k", "window_s", "hop_s", "min_separation_ms", "tolerance_ms"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.hop_s > self.window_s:
            raise ConfigError("hop_s must not exceed window_s")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        ts = self.thresholds
        if not ts or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("thresholds must be a non-empty, strictly increasing list")

    def detector_params(self) -> dict:
        """Keyword arguments for :class:`eegspike.pipeline.SpikeDetector`."""
        return dict(
            wavelet=self.wavelet,
            scales=None if self.scales is None else list(self.scales),
            k=self.k,
            window_s=self.window_s,
            hop_s=self.hop_s,
            min_separation_ms=self.min_separation_ms,
            cascade_iterations=self.cascade_iterations,
            rulebase=self.rulebase,
            threshold=self.threshold,
            enabled_rules=sorted(self.postclass_enable),
        )


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


# section -> key -> (field name, converter)
_SCHEMA = {
    "wavelet": {
        "name": ("wavelet", str.strip),
        "scales": ("scales", _floats),
        "cascade_iterations": ("cascade_iterations", int),
    },
    "detector": {
        "k": ("k", float),
        "window_s": ("window_s", float),
        "hop_s": ("hop_s", float),
        "min_separation_ms": ("min_separation_ms", float),
    },
    "fuzzy": {
        "rulebase": ("rulebase", lambda s: s.strip() or None),
        "threshold": ("threshold", float),
    },
    "postclass": {
        "enable": ("postclass_enable", parse_enabled),
    },
    "eval": {
        "tolerance_ms": ("tolerance_ms", float),
        "thresholds": ("thresholds", _floats),
    },
}


def parse_config(text: str, base_dir: Path | None = None, source: str = "<string>") -> PipelineConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc.message if hasattr(exc, 'message') else exc}") from None
    values = {}
    for section in cp.sections():
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in schema:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            name, conv = schema[key]
            try:
                values[name] = conv(raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {exc}") from None
    rb = values.get("rulebase")
    if rb and base_dir is not None and not Path(rb).is_absolute():
        values["rulebase"] = str(base_dir / rb)
    try:
        return PipelineConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path=None) -> PipelineConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent, str(path))


def with_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
