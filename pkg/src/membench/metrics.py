"""Speedup over the naive variant and relative memory-bandwidth utilization.

Utilization is ``(bytes_moved / elapsed) / stream_bandwidth``: the achieved
rate of a kernel, using a compulsory-traffic model for its bytes, as a
fraction of what STREAM measured on the same machine. Values above 1 are
kept (never clamped) and flagged; they mean the working set was cache
resident or the traffic model undercounts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .stream import BandwidthMeasurement, Mode, StreamKind


class MetricError(ValueError):
    pass


# --- traffic models ----------------------------------------------------------

@dataclass(frozen=True)
class TransposeWorkload:
    n: int


@dataclass(frozen=True)
class BlurWorkload:
    w: int
    h: int
    c: int
    f: int


@dataclass(frozen=True)
class StreamWorkload:
    kind: StreamKind
    n: int


Workload = Union[TransposeWorkload, BlurWorkload, StreamWorkload]


def bytes_moved(workload: Workload) -> int:
    """Compulsory DRAM traffic of one run, ignoring write-allocate and conflict misses.

    transpose(n): every float64 element read once and written once, 2*8*n^2.
    blur(w, h, c, f): two passes, each streaming the float32 image in and
    out once, 2*(2*w*h*c*4). Independent of f.
    stream(kind, n): bytes_per_iter * n.
    """
    if isinstance(workload, TransposeWorkload):
        _positive(n=workload.n)
        return 2 * 8 * workload.n ** 2
    if isinstance(workload, BlurWorkload):
        _positive(w=workload.w, h=workload.h, c=workload.c, f=workload.f)
        return 2 * (2 * workload.w * workload.h * workload.c * 4)
    if isinstance(workload, StreamWorkload):
        _positive(n=workload.n)
        return workload.kind.bytes_per_iter * workload.n
    raise TypeError(f"unknown workload {workload!r}")


def _positive(**params):
    for name, v in params.items():
        if v < 1:
            raise MetricError(f"{name} must be positive, got {v}")


# --- records -----------------------------------------------------------------

@dataclass(frozen=True)
class UtilizationRecord:
    label: str
    elapsed: float
    bytes_moved: int
    stream_baseline: float
    utilization: float
    overflow: bool


@dataclass(frozen=True)
class SpeedupRecord:
    label: str
    t_naive: float
    t_variant: float
    speedup: float


def _bandwidth_of(baseline: Union[BandwidthMeasurement, float]) -> float:
    if isinstance(baseline, BandwidthMeasurement):
        if baseline.level is not None and not baseline.level.is_dram:
            raise MetricError(f"baseline must be measured at DRAM, not {baseline.level.name}")
        return baseline.best_bandwidth
    bw = float(baseline)
    if not (math.isfinite(bw) and bw > 0):
        raise MetricError(f"baseline bandwidth must be positive and finite, got {baseline!r}")
    return bw


def utilization(nbytes: float, elapsed: float, baseline: Union[BandwidthMeasurement, float],
                label: str = "") -> UtilizationRecord:
    if not elapsed > 0:
        raise MetricError(f"elapsed time must be positive, got {elapsed!r}")
    if not nbytes > 0:
        raise MetricError(f"bytes moved must be positive, got {nbytes!r}")
    bw = _bandwidth_of(baseline)
    u = (nbytes / elapsed) / bw
    return UtilizationRecord(label, elapsed, nbytes, bw, u, u > 1.0)


def speedup(t_naive: float, t_variant: float, label: str = "") -> SpeedupRecord:
    """``t_naive / t_variant``; values below 1 (slowdowns) are reported as they are."""
    if not (t_naive > 0 and t_variant > 0):
        raise MetricError(f"times must be positive, got {t_naive!r} and {t_variant!r}")
    return SpeedupRecord(label, t_naive, t_variant, t_naive / t_variant)


def select_baseline(measurements: Iterable[BandwidthMeasurement], threads: int) -> BandwidthMeasurement:
    """Best DRAM bandwidth over the four STREAM kinds for a kernel run on ``threads`` threads.

    Sequential kernels (``threads == 1``) use single-thread DRAM runs; parallel
    kernels use the multi-threaded ones. When only one flavor exists (a
    single-core device), it serves both.
    """
    dram = [m for m in measurements
            if m.mode is Mode.THREADED and (m.level is None or m.level.is_dram)]
    if not dram:
        raise MetricError("no DRAM STREAM measurement available; run the stream suite first or pass --baseline")
    if threads == 1:
        matching = [m for m in dram if m.threads == 1]
    else:
        matching = [m for m in dram if m.threads > 1]
    pool = matching or dram
    return max(pool, key=lambda m: m.best_bandwidth)
