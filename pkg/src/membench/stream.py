"""STREAM COPY/SCALE/SUM/TRIAD kernels and the memory-hierarchy sweep."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from numba import njit

from .device import DeviceProfile, MemoryLevel
from .parallel import WorkerPool
from .timing import RepetitionPolicy, TimingStats, measure

log = logging.getLogger(__name__)

ELEM_BYTES = 8
# Fixed initial values; every kernel result is exactly representable.
INIT_A, INIT_B, INIT_C, SCALAR_D = 4.0, 1.0, 2.0, 3.0
# Lower bound on bytes streamed per timed sample; tiny cache-level arrays are
# swept several times inside one sample so call overhead stays negligible.
MIN_SAMPLE_BYTES = 4 << 20
# Working set used for DRAM when the device declares no cache to defeat.
DEFAULT_DRAM_WORKING_SET = 64 << 20
# Upper/lower working-set bounds relative to the target and next-faster level.
MAX_TARGET_FRACTION = 0.5
MIN_FASTER_MULTIPLE = 4


class StreamKind(enum.Enum):
    COPY = ("a[i] = b[i]", 16, 0, 2)
    SCALE = ("a[i] = d*b[i]", 16, 1, 2)
    SUM = ("a[i] = b[i] + c[i]", 24, 1, 3)
    TRIAD = ("a[i] = b[i] + d*c[i]", 24, 2, 3)

    def __init__(self, formula, bytes_per_iter, flops_per_iter, n_arrays):
        self.formula = formula
        self.bytes_per_iter = bytes_per_iter
        self.flops_per_iter = flops_per_iter
        self.n_arrays = n_arrays

    def expected(self) -> float:
        return {
            StreamKind.COPY: INIT_B,
            StreamKind.SCALE: SCALAR_D * INIT_B,
            StreamKind.SUM: INIT_B + INIT_C,
            StreamKind.TRIAD: INIT_B + SCALAR_D * INIT_C,
        }[self]


class Mode(str, enum.Enum):
    THREADED = "threaded"
    SEQUENTIAL_SCALED = "sequential_scaled"


class StreamError(RuntimeError):
    pass


class SizingError(StreamError):
    pass


class KernelCorrectnessError(StreamError):
    pass


class ResourceError(StreamError):
    pass


@dataclass(frozen=True)
class BandwidthMeasurement:
    kind: StreamKind
    level: Optional[MemoryLevel]
    mode: Mode
    n_elems: int
    best_bandwidth: float  # bytes/s, already multiplied by scaled_by_cores
    scaled_by_cores: int
    threads: int
    timing: TimingStats
    bytes_per_sample: int  # bytes streamed in one timed sample (kernel may sweep the arrays several times)

    def __post_init__(self):
        if not self.best_bandwidth > 0:
            raise StreamError(f"non-positive bandwidth {self.best_bandwidth!r}")
        if self.mode is Mode.THREADED and self.scaled_by_cores != 1:
            raise StreamError("threaded measurements are never scaled")


@dataclass(frozen=True)
class SweepFailure:
    level: MemoryLevel
    kind: Optional[StreamKind]
    error: Exception


@dataclass
class SweepResult:
    measurements: List[BandwidthMeasurement]
    failures: List[SweepFailure]

    def __iter__(self):
        return iter(self.measurements)

    def __len__(self):
        return len(self.measurements)


# --- kernels -----------------------------------------------------------------
# Each sweeps [lo, hi) ``inner`` times; nogil so worker threads run in parallel.

@njit(nogil=True, cache=True)
def _copy(a, b, c, d, lo, hi, inner):
    for _ in range(inner):
        for i in range(lo, hi):
            a[i] = b[i]


@njit(nogil=True, cache=True)
def _scale(a, b, c, d, lo, hi, inner):
    for _ in range(inner):
        for i in range(lo, hi):
            a[i] = d * b[i]


@njit(nogil=True, cache=True)
def _sum(a, b, c, d, lo, hi, inner):
    for _ in range(inner):
        for i in range(lo, hi):
            a[i] = b[i] + c[i]


@njit(nogil=True, cache=True)
def _triad(a, b, c, d, lo, hi, inner):
    for _ in range(inner):
        for i in range(lo, hi):
            a[i] = b[i] + d * c[i]


@njit(nogil=True, cache=True)
def _fill(a, b, c, lo, hi, va, vb, vc):
    for i in range(lo, hi):
        a[i] = va
        b[i] = vb
        c[i] = vc


_KERNELS = {
    StreamKind.COPY: _copy,
    StreamKind.SCALE: _scale,
    StreamKind.SUM: _sum,
    StreamKind.TRIAD: _triad,
}


def allocate_arrays(n_elems: int, pool: WorkerPool):
    """Allocate a, b, c and first-touch them with the same partitioning as the timed loop."""
    try:
        a = np.empty(n_elems, dtype=np.float64)
        b = np.empty(n_elems, dtype=np.float64)
        c = np.empty(n_elems, dtype=np.float64)
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate 3 x {n_elems} doubles") from exc
    pool.run_static(lambda lo, hi: _fill(a, b, c, lo, hi, INIT_A, INIT_B, INIT_C), n_elems)
    return a, b, c


def verify(kind: StreamKind, a, b, c) -> None:
    want = kind.expected()
    for name, arr, value in (("a", a, want), ("b", b, INIT_B), ("c", c, INIT_C)):
        bad = np.flatnonzero(arr != value)
        if bad.size:
            i = int(bad[0])
            raise KernelCorrectnessError(
                f"{kind.name}: {name}[{i}] = {arr[i]!r}, expected {value!r} ({bad.size} mismatches)"
            )


def run_stream_test(
    kind: StreamKind,
    n_elems: int,
    threads: int = 1,
    policy: RepetitionPolicy = RepetitionPolicy(),
    *,
    level: Optional[MemoryLevel] = None,
    scale_cores: Optional[int] = None,
) -> BandwidthMeasurement:
    """Time one STREAM kernel over ``n_elems`` elements and verify the result.

    With ``scale_cores`` set, the run must be single-threaded and the achieved
    bandwidth is multiplied by ``scale_cores`` (per-core resources).
    """
    if n_elems < 1:
        raise ValueError("n_elems must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if scale_cores is not None and threads != 1:
        raise ValueError("sequential_scaled runs are single-threaded")

    kernel = _KERNELS[kind]
    inner = max(1, math.ceil(MIN_SAMPLE_BYTES / (kind.bytes_per_iter * n_elems)))
    with WorkerPool(threads) as pool:
        a, b, c = allocate_arrays(n_elems, pool)
        d = SCALAR_D
        stats = measure(lambda: pool.run_static(lambda lo, hi: kernel(a, b, c, d, lo, hi, inner), n_elems), policy)
    verify(kind, a, b, c)

    nbytes = kind.bytes_per_iter * n_elems * inner
    bandwidth = nbytes / stats.best
    if scale_cores is not None:
        return BandwidthMeasurement(kind, level, Mode.SEQUENTIAL_SCALED, n_elems,
                                    bandwidth * scale_cores, scale_cores, 1, stats, nbytes)
    return BandwidthMeasurement(kind, level, Mode.THREADED, n_elems, bandwidth, 1, threads, stats, nbytes)


def size_for_level(level: MemoryLevel, device: DeviceProfile, kind: StreamKind) -> int:
    """Array length whose working set lives in ``level`` but not in the level above it.

    Caches: the largest n with working set <= 50% of the level and >= 4x the
    next-faster level. DRAM: the smallest n with working set >= 4x the largest
    cache (still capped at 50% of DRAM).
    """
    if level not in device.levels:
        raise SizingError(f"level {level.name} is not part of device {device.name}")
    per_elem = kind.n_arrays * ELEM_BYTES
    faster = device.faster_than(level)
    upper = math.floor(MAX_TARGET_FRACTION * level.capacity / per_elem)
    lower = math.ceil(MIN_FASTER_MULTIPLE * faster.capacity / per_elem) if faster else 1

    if lower > upper or upper < 1:
        raise SizingError(
            f"{device.name}: cannot size {kind.name} for {level.name} ({level.capacity} B): "
            f"needs >= {MIN_FASTER_MULTIPLE}x {faster.name if faster else '-'} "
            f"({lower * per_elem} B) and <= {MAX_TARGET_FRACTION:.0%} of {level.name} ({upper * per_elem} B)"
        )
    if level.is_dram:
        if faster is None:
            return min(upper, DEFAULT_DRAM_WORKING_SET // per_elem)
        return lower
    return upper


def run_hierarchy_sweep(
    device: DeviceProfile,
    policy: RepetitionPolicy = RepetitionPolicy(),
    *,
    kinds=tuple(StreamKind),
    dram_single_core: bool = False,
) -> SweepResult:
    """Run every STREAM kind on every level of ``device``.

    Shared levels run threaded on all cores. Per-core levels run on one
    thread and are scaled by the core count. ``dram_single_core`` adds
    single-thread DRAM runs, the baseline for sequential kernels. Errors are
    recorded per level/kind and the sweep continues.
    """
    measurements: List[BandwidthMeasurement] = []
    failures: List[SweepFailure] = []
    for level in device.levels:
        for kind in kinds:
            try:
                n = size_for_level(level, device, kind)
            except SizingError as exc:
                log.warning("%s", exc)
                failures.append(SweepFailure(level, kind, exc))
                continue
            runs = []
            if level.shared:
                runs.append(dict(threads=device.core_count))
                if dram_single_core and level.is_dram and device.core_count > 1:
                    runs.append(dict(threads=1))
            else:
                runs.append(dict(threads=1, scale_cores=device.core_count))
            for extra in runs:
                try:
                    m = run_stream_test(kind, n, policy=policy, level=level, **extra)
                except (StreamError, MemoryError) as exc:
                    log.error("%s %s: %s", level.name, kind.name, exc)
                    failures.append(SweepFailure(level, kind, exc))
                    continue
                measurements.append(m)
        primary = [m for m in measurements if m.level == level
                   and (m.mode is Mode.SEQUENTIAL_SCALED or m.threads == device.core_count)]
        _check_copy_scale(primary)
    return SweepResult(measurements, failures)


def _check_copy_scale(level_measurements) -> None:
    by_kind = {m.kind: m.best_bandwidth for m in level_measurements}
    copy, scale = by_kind.get(StreamKind.COPY), by_kind.get(StreamKind.SCALE)
    if copy and scale and abs(copy - scale) > 0.25 * max(copy, scale):
        log.warning("%s: COPY (%.3g B/s) and SCALE (%.3g B/s) differ by more than 25%%; "
                    "machine may not be quiet", level_measurements[0].level.name, copy, scale)
