"""Command-line driver: ``membench {stream,transpose,blur,suite,chart}``.

Settings come from flags, then an optional ``--config`` JSON file whose keys
are the long flag names with dashes replaced by underscores, then built-in
defaults. The effective settings are written to ``manifest.json`` next to
the records.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import blur as blur_mod
from . import transpose as tr
from .device import DeviceProfile, ProfileError, load_profile
from .image import ImageError, PATTERNS, load_ppm, synth_image
from .report import (ReportError, emit_csv, emit_json, dram_baseline, parse_records, render_chart,
                     stream_chart, time_chart, utilization_chart)
from .suites import (SuiteOutcome, baseline_from_sweep, run_blur_suite, run_stream_suite,
                     run_transpose_suite)
from .timing import MeasurementError, RepetitionPolicy

log = logging.getLogger("membench")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

DEFAULTS = dict(
    out="results",
    format="both",
    reps=10,
    warmup=2,
    budget=None,
    size=[8192, 16384],
    block=None,
    threads=None,
    filter_size=blur_mod.DEFAULT_FILTER_SIZE,
    sigma=None,
    image=None,
    synthetic="random",
    w=2544,
    h=2027,
    channels=3,
    seed=0,
    variants=None,
    baseline=None,
    skip=[],
    utilization=False,
    profile=None,
)


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default settings")
    p.add_argument("--profile", help="device profile JSON file or shipped profile name")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--format", choices=("csv", "json", "both"))
    p.add_argument("--reps", type=int, help="measured repetitions (default 10)")
    p.add_argument("--warmup", type=int, help="untimed warm-up runs (default 2)")
    p.add_argument("--budget", type=float, help="stop measuring after this many seconds of samples")
    p.add_argument("--threads", type=int, help="worker threads (default: profile core count)")
    p.add_argument("--seed", type=int)
    p.add_argument("--baseline", help="records file holding DRAM stream results, for utilization")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_transpose(p):
    p.add_argument("--size", type=int, action="append", help="matrix side; repeatable (default 8192, 16384)")
    p.add_argument("--block", type=int, help="block side in elements (default: from the smallest cache)")


def _add_blur(p):
    p.add_argument("--filter-size", type=int, help="odd kernel size (default 19)")
    p.add_argument("--sigma", type=float, help="kernel sigma (default 0.3*((F-1)/2-1)+0.8)")
    p.add_argument("--image", help="binary PPM (P6) input image")
    p.add_argument("--synthetic", choices=PATTERNS, help="synthesize the input instead of loading --image")
    p.add_argument("--w", type=int, help="synthetic image width (default 2544)")
    p.add_argument("--h", type=int, help="synthetic image height (default 2027)")
    p.add_argument("--channels", type=int, choices=(1, 3), help="synthetic image channels (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="membench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stream", help="STREAM sweep over every memory level of the profile")
    _add_common(p)

    p = sub.add_parser("transpose", help="in-place transposition ladder")
    _add_common(p)
    _add_transpose(p)
    p.add_argument("--variants", help=f"comma list from {','.join(tr.VARIANTS)}")
    p.add_argument("--utilization", action="store_true", default=None, help="score against --baseline")

    p = sub.add_parser("blur", help="Gaussian blur ladder")
    _add_common(p)
    _add_blur(p)
    p.add_argument("--variants", help=f"comma list from {','.join(blur_mod.VARIANTS)}")
    p.add_argument("--utilization", action="store_true", default=None, help="score against --baseline")

    p = sub.add_parser("suite", help="stream, then transpose and blur, then charts")
    _add_common(p)
    _add_transpose(p)
    _add_blur(p)
    p.add_argument("--skip", action="append", choices=("stream", "transpose", "blur"), help="repeatable")

    p = sub.add_parser("chart", help="render SVG charts from record files")
    p.add_argument("records", nargs="+", help="CSV or JSON record files")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"{path}: unknown settings {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in cfg and value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _policy(cfg) -> RepetitionPolicy:
    try:
        return RepetitionPolicy(cfg["warmup"], cfg["reps"], cfg["budget"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _device(cfg) -> DeviceProfile:
    if not cfg["profile"]:
        raise UsageError("--profile is required")
    try:
        device = load_profile(cfg["profile"])
    except (FileNotFoundError, ProfileError) as exc:
        raise UsageError(str(exc)) from None
    if cfg["threads"] is not None and cfg["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    return device


def _variants(cfg, known) -> List[str]:
    if not cfg["variants"]:
        return list(known)
    names = [v.strip() for v in cfg["variants"].split(",") if v.strip()] \
        if isinstance(cfg["variants"], str) else list(cfg["variants"])
    bad = [v for v in names if v not in known]
    if bad:
        raise UsageError(f"unknown variants {', '.join(bad)}; choose from {', '.join(known)}")
    return names


def _baseline_from_file(cfg):
    path = Path(cfg["baseline"])
    if not path.is_file():
        raise UsageError(f"baseline file not found: {path}")
    try:
        records = parse_records(path.read_bytes())
        dram_baseline(records, 1)
    except (ReportError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    return lambda threads: dram_baseline(records, threads)


def _image(cfg):
    if cfg["image"]:
        try:
            return load_ppm(cfg["image"])
        except (OSError, ImageError) as exc:
            raise UsageError(f"cannot load image: {exc}") from None
    return synth_image(cfg["w"], cfg["h"], cfg["channels"], cfg["synthetic"], seed=cfg["seed"])


def _write(out_dir: Path, stem: str, records, fmt: str) -> List[Path]:
    if not records:
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        (out_dir / f"{stem}.csv").write_bytes(emit_csv(records))
        written.append(out_dir / f"{stem}.csv")
    if fmt in ("json", "both"):
        (out_dir / f"{stem}.json").write_bytes(emit_json(records))
        written.append(out_dir / f"{stem}.json")
    return written


def _manifest(out_dir: Path, cfg: dict, device: Optional[DeviceProfile], outcome: SuiteOutcome, files) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": {k: v for k, v in cfg.items()},
        "device": device.to_dict() if device else None,
        "records": len(outcome.records),
        "files": [str(f) for f in files],
        "skipped": [{"what": s.what, "reason": s.reason} for s in outcome.skipped],
        "errors": outcome.errors,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, default=str) + "\n")


def _report(outcome: SuiteOutcome) -> None:
    for s in outcome.skipped:
        print(f"skipped {s.what}: {s.reason}", file=sys.stderr)
    for e in outcome.errors:
        print(f"error: {e}", file=sys.stderr)


def render_charts(records, out_dir: Path) -> List[Path]:
    """Write every chart the records support; returns the SVG paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    builders = [
        ("stream", lambda: stream_chart(records)),
        ("transpose_time", lambda: time_chart(records, "transpose", "In-place transposition: time")),
        ("blur_time", lambda: time_chart(records, "blur", "Gaussian blur: time")),
        ("utilization", lambda: utilization_chart(records)),
    ]
    paths = []
    for name, build in builders:
        try:
            spec = build()
        except ReportError:
            continue
        path = out_dir / f"{name}.svg"
        path.write_bytes(render_chart(spec))
        paths.append(path)
    return paths


# --- commands ----------------------------------------------------------------

def cmd_stream(cfg) -> int:
    device = _device(cfg)
    if cfg["threads"]:
        device = device.with_cores(cfg["threads"])
    outcome, _ = run_stream_suite(device, _policy(cfg))
    out_dir = Path(cfg["out"])
    files = _write(out_dir, "stream", outcome.records, cfg["format"])
    _manifest(out_dir, cfg, device, outcome, files)
    _report(outcome)
    return EXIT_OK if outcome.ok else EXIT_FAILED


def _baseline_for(cfg):
    if cfg["baseline"]:
        return _baseline_from_file(cfg)
    if cfg["utilization"]:
        raise UsageError("utilization requested but no STREAM baseline: run `membench stream` first "
                         "and pass its records with --baseline")
    return None


def cmd_transpose(cfg) -> int:
    device = _device(cfg)
    variants = _variants(cfg, tr.VARIANTS)
    baseline = _baseline_for(cfg)
    outcome = run_transpose_suite(device, cfg["size"], variants, _policy(cfg), blk=cfg["block"],
                                  threads=cfg["threads"], baseline=baseline, seed=cfg["seed"])
    out_dir = Path(cfg["out"])
    files = _write(out_dir, "transpose", outcome.records, cfg["format"])
    _manifest(out_dir, cfg, device, outcome, files)
    _report(outcome)
    return EXIT_OK if outcome.ok else EXIT_FAILED


def cmd_blur(cfg) -> int:
    device = _device(cfg)
    variants = _variants(cfg, blur_mod.VARIANTS)
    baseline = _baseline_for(cfg)
    img = _image(cfg)
    try:
        outcome = run_blur_suite(device, img, variants, _policy(cfg), f=cfg["filter_size"], sigma=cfg["sigma"],
                                 threads=cfg["threads"], baseline=baseline)
    except blur_mod.BlurError as exc:
        raise UsageError(str(exc)) from None
    out_dir = Path(cfg["out"])
    files = _write(out_dir, "blur", outcome.records, cfg["format"])
    _manifest(out_dir, cfg, device, outcome, files)
    _report(outcome)
    return EXIT_OK if outcome.ok else EXIT_FAILED


def cmd_suite(cfg) -> int:
    device = _device(cfg)
    skip = set(cfg["skip"] or ())
    policy = _policy(cfg)
    if cfg["threads"]:
        device = device.with_cores(cfg["threads"])
    img = _image(cfg) if "blur" not in skip else None
    if "stream" in skip and not cfg["baseline"] and not {"transpose", "blur"} <= skip:
        raise UsageError("utilization needs a STREAM baseline: do not skip stream, or pass --baseline")

    total = SuiteOutcome()
    stream_ok = True
    baseline = None
    if "stream" not in skip:
        outcome, sweep = run_stream_suite(device, policy)
        total.extend(outcome)
        stream_ok = outcome.ok
        if sweep.measurements:
            baseline = baseline_from_sweep(sweep)
    if cfg["baseline"]:
        baseline = _baseline_from_file(cfg)
    if baseline is None and not {"transpose", "blur"} <= skip:
        total.errors.append("no DRAM STREAM baseline available; utilization cannot be computed")
        _report(total)
        return EXIT_FAILED

    if "transpose" not in skip:
        total.extend(run_transpose_suite(device, cfg["size"], _variants(cfg, tr.VARIANTS), policy,
                                         blk=cfg["block"], threads=cfg["threads"], baseline=baseline,
                                         seed=cfg["seed"]))
    if "blur" not in skip:
        try:
            total.extend(run_blur_suite(device, img, list(blur_mod.VARIANTS), policy, f=cfg["filter_size"],
                                        sigma=cfg["sigma"], threads=cfg["threads"], baseline=baseline))
        except blur_mod.BlurError as exc:
            total.errors.append(str(exc))

    out_dir = Path(cfg["out"])
    files = []
    for suite in ("stream", "transpose", "blur"):
        files += _write(out_dir, suite, [r for r in total.records if r.suite == suite], cfg["format"])
    if total.records:
        files += render_charts(total.records, out_dir)
    _manifest(out_dir, cfg, device, total, files)
    _report(total)
    return EXIT_OK if total.ok and stream_ok else EXIT_FAILED


def cmd_chart(args) -> int:
    records = []
    for path in args.records:
        try:
            records += parse_records(Path(path).read_bytes())
        except (OSError, ReportError, ValueError) as exc:
            raise UsageError(f"{path}: {exc}") from None
    paths = render_charts(records, Path(args.out or DEFAULTS["out"]))
    if not paths:
        print("error: no chartable records", file=sys.stderr)
        return EXIT_FAILED
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {"stream": cmd_stream, "transpose": cmd_transpose, "blur": cmd_blur, "suite": cmd_suite}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "chart":
            return cmd_chart(args)
        return COMMANDS[args.command](resolve(args))
    except UsageError as exc:
        print(f"membench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MeasurementError as exc:
        print(f"membench: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
