"""Result records, CSV/JSON serialization, and SVG bar charts.

CSV header (fixed, one row per record)::

    suite,variant,device,n,w,h,c,f,blk,threads,best_s,median_s,bytes_moved,
    baseline_Bps,utilization,speedup,schema_version

Empty cells (CSV) and ``null`` (JSON) mark fields that do not apply. For
``stream`` records ``variant`` is ``KIND@LEVEL``, ``bytes_moved`` is the
traffic of one timed sample, and ``baseline_Bps`` is the bandwidth the record
measured (already multiplied by the core count for per-core levels).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

SCHEMA_VERSION = 1
SUITES = ("stream", "transpose", "blur")

CSV_FIELDS = (
    "suite", "variant", "device", "n", "w", "h", "c", "f", "blk", "threads",
    "best_s", "median_s", "bytes_moved", "baseline_Bps", "utilization", "speedup",
    "schema_version",
)
_INT_FIELDS = {"n", "w", "h", "c", "f", "blk", "threads", "bytes_moved", "schema_version"}
_FLOAT_FIELDS = {"best_s", "median_s", "baseline_Bps", "utilization", "speedup"}


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    suite: str
    variant: str
    device: str
    n: Optional[int] = None
    w: Optional[int] = None
    h: Optional[int] = None
    c: Optional[int] = None
    f: Optional[int] = None
    blk: Optional[int] = None
    threads: Optional[int] = None
    best_s: Optional[float] = None
    median_s: Optional[float] = None
    bytes_moved: Optional[int] = None
    baseline_Bps: Optional[float] = None
    utilization: Optional[float] = None
    speedup: Optional[float] = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ReportError(f"unknown suite {self.suite!r}")
        if self.schema_version is None:
            raise ReportError("schema_version is required")
        for name in _FLOAT_FIELDS | _INT_FIELDS:
            v = getattr(self, name)
            if v is not None and isinstance(v, float) and not math.isfinite(v):
                raise ReportError(f"{self.suite}/{self.variant}: field {name} is not finite ({v!r})")

    def to_dict(self) -> dict:
        return asdict(self)


assert tuple(f.name for f in fields(RunRecord)) == CSV_FIELDS


def _coerce(name: str, value):
    if value is None or value == "":
        return None
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    return str(value)


def record_from_dict(d: dict) -> RunRecord:
    missing = [k for k in ("suite", "variant", "device", "schema_version") if d.get(k) in (None, "")]
    if missing:
        raise ReportError(f"record missing {', '.join(missing)}")
    return RunRecord(**{k: _coerce(k, d.get(k)) for k in CSV_FIELDS})


def _require(records: Sequence[RunRecord]) -> Sequence[RunRecord]:
    records = list(records)
    if not records:
        raise ReportError("no records to emit")
    return records


def emit_json(records: Iterable[RunRecord]) -> bytes:
    rows = [r.to_dict() for r in _require(records)]
    return (json.dumps(rows, indent=1) + "\n").encode("utf-8")


def emit_csv(records: Iterable[RunRecord]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in _require(records):
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                         for v in (getattr(r, k) for k in CSV_FIELDS)])
    return buf.getvalue().encode("utf-8")


def parse_json(data: bytes) -> List[RunRecord]:
    rows = json.loads(data)
    if not isinstance(rows, list):
        raise ReportError("expected a JSON array of records")
    return [record_from_dict(r) for r in rows]


def parse_csv(data: bytes) -> List[RunRecord]:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ReportError(f"unexpected CSV header {reader.fieldnames}")
    return [record_from_dict(row) for row in reader]


def parse_records(data: bytes) -> List[RunRecord]:
    """Parse either format, sniffing JSON by its leading bracket."""
    if data.lstrip()[:1] == b"[":
        return parse_json(data)
    return parse_csv(data)


def dram_baseline(records: Iterable[RunRecord], threads: int) -> float:
    """Best DRAM STREAM bandwidth in ``records`` for a kernel on ``threads`` threads."""
    dram = [r for r in records if r.suite == "stream" and r.variant.upper().endswith("@DRAM")
            and r.baseline_Bps is not None]
    if not dram:
        raise ReportError("no DRAM stream records found in the baseline file")
    matching = [r for r in dram if (r.threads == 1) == (threads == 1)]
    return max(r.baseline_Bps for r in (matching or dram))


# --- charts ------------------------------------------------------------------

CHART_KINDS = ("time", "bandwidth", "utilization")

_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7")


@dataclass(frozen=True)
class ChartGroup:
    label: str
    bars: Tuple[Tuple[str, float], ...]  # (variant, value)


@dataclass(frozen=True)
class ChartSpec:
    title: str
    kind: str
    groups: Tuple[ChartGroup, ...]
    y_label: str = ""
    baseline_variant: str = "naive"  # time charts: annotated with its time, others with speedup over it

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ReportError(f"unknown chart kind {self.kind!r}")
        if not self.groups or any(not g.bars for g in self.groups):
            raise ReportError("a chart needs at least one group and every group needs bars")


class RenderError(ReportError):
    pass


def _fmt_time(t: float) -> str:
    return f"{t:.3g} s"


def _fmt_speedup(s: float) -> str:
    return f"x{s:.2f}"


def _fmt_bandwidth(b: float) -> str:
    return f"{b / 1e9:.3g} GB/s"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _nice_max(v: float) -> float:
    if v <= 0:
        return 1.0
    exp = math.floor(math.log10(v))
    for m in (1, 2, 2.5, 5, 10):
        if m * 10 ** exp >= v:
            return m * 10 ** exp
    return 10 ** (exp + 1)  # pragma: no cover


def render_chart(spec: ChartSpec) -> bytes:
    """Grouped bar chart as self-contained SVG 1.1.

    time: each group is labeled with its baseline variant's time; every other
    bar carries its speedup over that baseline. utilization: the axis stops at
    1 and bars above 1 are clipped and marked with their value. Output is a
    pure function of ``spec``.
    """
    for g in spec.groups:
        for variant, value in g.bars:
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise RenderError(f"non-finite value {value!r} for {g.label}/{variant}")
            if value < 0:
                raise RenderError(f"negative value {value!r} for {g.label}/{variant}")

    variants: List[str] = []
    for g in spec.groups:
        for v, _ in g.bars:
            if v not in variants:
                variants.append(v)
    colors = {v: _PALETTE[i % len(_PALETTE)] for i, v in enumerate(variants)}

    bar_w, gap, left, right, top, bottom = 28, 24, 70, 20, 60, 70
    plot_h = 260
    n_bars = sum(len(g.bars) for g in spec.groups)
    plot_w = n_bars * bar_w + (len(spec.groups) + 1) * gap
    legend_w = 150
    width = left + plot_w + right + legend_w
    height = top + plot_h + bottom

    peak = max(v for g in spec.groups for _, v in g.bars)
    y_max = 1.0 if spec.kind == "utilization" else _nice_max(peak)
    scale_val = 1e9 if spec.kind == "bandwidth" else 1.0

    def y_of(v: float) -> float:
        return top + plot_h - plot_h * min(v, y_max) / y_max

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + plot_w / 2:.1f}" y="22" text-anchor="middle" font-size="14" '
        f'font-weight="bold">{_esc(spec.title)}</text>',
    ]
    # axes and ticks
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>')
    for i in range(6):
        v = y_max * i / 5
        y = y_of(v)
        out.append(f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left + plot_w}" y2="{y:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{v / scale_val:.3g}</text>')
    y_label = spec.y_label or {"time": "time, s", "bandwidth": "bandwidth, GB/s", "utilization": "utilization"}[spec.kind]
    out.append(f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{_esc(y_label)}</text>')

    x = left + gap
    for g in spec.groups:
        group_x0 = x
        base = dict(g.bars).get(spec.baseline_variant)
        for variant, value in g.bars:
            y = y_of(value)
            h = top + plot_h - y
            out.append(f'<rect class="bar" x="{x}" y="{y:.1f}" width="{bar_w - 2}" height="{h:.1f}" '
                       f'fill="{colors[variant]}"><title>{_esc(g.label)} / {_esc(variant)}: {value!r}</title></rect>')
            label = None
            if spec.kind == "time" and base and variant != spec.baseline_variant:
                label = _fmt_speedup(base / value) if value > 0 else None
            elif spec.kind == "utilization":
                label = f"{value:.2f}"
                if value > 1.0:
                    out.append(f'<path class="overflow" d="M{x + (bar_w - 2) / 2:.1f} {top - 12} '
                               f'l-5 8 h10 z" fill="#c00000"/>')
                    label = f"&gt;1 ({value:.2f})"
            elif spec.kind == "bandwidth":
                label = _fmt_bandwidth(value)
            if label:
                ty = y - 4 if not (spec.kind == "utilization" and value > 1.0) else top - 14
                cls = "speedup" if spec.kind == "time" else "value"
                out.append(f'<text class="{cls}" x="{x + (bar_w - 2) / 2:.1f}" y="{ty:.1f}" text-anchor="middle" '
                           f'font-size="9">{label}</text>')
            x += bar_w
        center = (group_x0 + x) / 2
        out.append(f'<text x="{center:.1f}" y="{top + plot_h + 16}" text-anchor="middle">{_esc(g.label)}</text>')
        if spec.kind == "time" and base is not None:
            out.append(f'<text class="naive-time" x="{center:.1f}" y="{top - 28}" text-anchor="middle" '
                       f'font-weight="bold">{spec.baseline_variant}: {_fmt_time(base)}</text>')
        x += gap

    ly = top
    lx = left + plot_w + right
    for v in variants:
        out.append(f'<rect x="{lx}" y="{ly}" width="12" height="12" fill="{colors[v]}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly + 10}">{_esc(v)}</text>')
        ly += 18
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _group_records(records: Iterable[RunRecord], suite: str, key) -> Dict[str, List[RunRecord]]:
    groups: Dict[str, List[RunRecord]] = {}
    for r in records:
        if r.suite == suite:
            groups.setdefault(key(r), []).append(r)
    return groups


def _size_label(r: RunRecord) -> str:
    if r.suite == "transpose":
        return f"{r.device} n={r.n}"
    if r.suite == "blur":
        return f"{r.device} {r.w}x{r.h}x{r.c} F={r.f}"
    return r.device


def time_chart(records: Iterable[RunRecord], suite: str, title: Optional[str] = None) -> ChartSpec:
    groups = _group_records(records, suite, _size_label)
    if not groups:
        raise ReportError(f"no {suite} records to chart")
    return ChartSpec(
        title or f"{suite}: computation time",
        "time",
        tuple(ChartGroup(label, tuple((r.variant, r.best_s) for r in rs)) for label, rs in groups.items()),
    )


def stream_chart(records: Iterable[RunRecord], title: str = "STREAM bandwidth") -> ChartSpec:
    groups = _group_records(records, "stream", lambda r: f"{r.device} {r.variant.split('@')[1]}"
                            + (" 1T" if r.variant.upper().endswith("@DRAM") and r.threads == 1 else ""))
    if not groups:
        raise ReportError("no stream records to chart")
    return ChartSpec(
        title,
        "bandwidth",
        tuple(ChartGroup(label, tuple((r.variant.split("@")[0], r.baseline_Bps) for r in rs))
              for label, rs in groups.items()),
    )


def utilization_chart(records: Iterable[RunRecord], title: str = "Relative memory bandwidth utilization") -> ChartSpec:
    groups: Dict[str, List[Tuple[str, float]]] = {}
    for r in records:
        if r.suite in ("transpose", "blur") and r.utilization is not None:
            groups.setdefault(f"{r.suite}: {_size_label(r)}", []).append((r.variant, r.utilization))
    if not groups:
        raise ReportError("no records carry utilization")
    return ChartSpec(title, "utilization", tuple(ChartGroup(k, tuple(v)) for k, v in groups.items()))
