"""Command-line front end: ``eegspike {detect,evaluate,roc,synth}``.

Exit status is 0 on success, 2 for configuration or usage problems and 1
for any other failure; failures print one ``eegspike: <kind>: <message>``
line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config, with_overrides
from .evaluation import (
    format_rate,
    match_events,
    rate_or_none,
    roc_sweep,
    sensitivity,
    specificity,
    write_report,
)
from .exceptions import ConfigError, EEGSpikeError
from .mimetic import write_features
from .pipeline import SpikeDetector
from .postclass import to_detection_list
from .signal_io import (
    read_annotations,
    read_detections,
    read_recording,
    write_annotations,
    write_detections,
    write_recording,
)
from .synth import SynthSpec, generate, preset

logger = logging.getLogger("eegspike")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _detector(args, cfg) -> SpikeDetector:
    params = cfg.detector_params()
    if getattr(args, "no_postclass", False):
        params["postclass"] = False
    return SpikeDetector(**params, n_jobs=args.workers).fit()


def _config(args):
    cfg = load_config(args.config)
    return with_overrides(cfg, threshold=getattr(args, "threshold", None))


def cmd_detect(args) -> int:
    cfg = _config(args)
    det = _detector(args, cfg)
    rec = read_recording(args.recording)
    table = det.features(rec)
    if args.dump_features:
        write_features(table.events, rec.sampling_rate_hz, args.dump_features)
    detections = det.postclassify(det.score_events(rec, table))
    dl = to_detection_list(detections)
    write_detections(dl, args.out)
    n_pos = len(dl.positives())
    print(f"{len(dl)} events, {n_pos} epileptiform -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    dets = read_detections(args.detections)
    ann = read_annotations(args.annotations)
    labels = read_recording(args.recording).labels if args.recording else None
    c = match_events(dets, ann, cfg.tolerance_ms, labels)
    sens = format_rate(rate_or_none(sensitivity, c))
    spec = format_rate(rate_or_none(specificity, c))
    print(f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} sensitivity={sens} specificity={spec}")
    if args.out:
        Path(args.out).write_text(
            f"tp,fp,tn,fn,sensitivity,specificity\n{c.tp},{c.fp},{c.tn},{c.fn},{sens},{spec}\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_roc(args) -> int:
    cfg = _config(args)
    det = _detector(args, cfg)
    rec = read_recording(args.recording)
    ann = read_annotations(args.annotations)
    events = det.score_events(rec)
    curve = roc_sweep(
        events,
        ann,
        cfg.thresholds,
        postclass=not args.no_postclass,
        enabled=cfg.postclass_enable,
        tol_ms=cfg.tolerance_ms,
        labels=rec.labels,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = write_report(curve, out / "roc.csv", out / "roc.svg")
    for p in curve.points:
        print(f"t={p.threshold:g} sensitivity={format_rate(p.sensitivity)} specificity={format_rate(p.specificity)}")
    if curve.optimal is not None:
        o = curve.optimal
        print(f"optimal t={o.threshold:g} sensitivity={format_rate(o.sensitivity)} specificity={format_rate(o.specificity)}")
    print(f"-> {csv_path}, {svg_path}")
    return EXIT_OK


def _load_spec(arg: str) -> tuple[str, SynthSpec]:
    path = Path(arg)
    if path.is_file():
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read synth spec {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: synth spec must be a JSON object")
        spec = SynthSpec.from_dict(data)
        return spec.name or path.stem, spec
    return arg, preset(arg)


def cmd_synth(args) -> int:
    name, spec = _load_spec(args.spec)
    rec, ann = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_recording(rec, out / f"{name}.eegr")
    write_annotations(ann, out / f"{name}.csv")
    print(f"{len(ann)} marks, {rec.n_samples} samples x {len(rec.labels)} channels -> {out / name}.{{eegr,csv}}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eegspike", description="Epileptiform discharge detection in EEG")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, detect=True):
        p.add_argument("--config", help="pipeline config file (INI)")
        if detect:
            p.add_argument("--threshold", type=float, help="fuzzy decision threshold (overrides config)")
            p.add_argument("--no-postclass", action="store_true", help="skip the rejection rules")
            p.add_argument("--workers", type=int, default=1, help="worker processes over channels")

    p = sub.add_parser("detect", help="run the full detector on a recording")
    p.add_argument("recording")
    p.add_argument("--out", required=True, help="detections CSV")
    p.add_argument("--dump-features", metavar="CSV", help="also write the feature vectors")
    common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score detections against annotations")
    p.add_argument("detections")
    p.add_argument("annotations")
    p.add_argument("--recording", help="recording whose channel labels bound the comparison")
    p.add_argument("--out", help="write the counts and rates as CSV")
    common(p, detect=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="sweep the decision threshold and plot a ROC curve")
    p.add_argument("recording")
    p.add_argument("annotations")
    p.add_argument("--out", required=True, help="output directory for roc.csv and roc.svg")
    common(p)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("synth", help="write a synthetic recording and its annotations")
    p.add_argument("spec", help="JSON spec file or preset (corpus-0, corpus-1, corpus-2, easy, medium, hard)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"eegspike: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EEGSpikeError, OSError) as exc:
        kind = type(exc).__name__
        print(f"eegspike: {kind}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
