"""Suite runners: verify every kernel, time it, and turn results into records."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import blur as blur_mod
from . import transpose as tr
from .device import DeviceProfile
from .metrics import BlurWorkload, TransposeWorkload, bytes_moved, select_baseline, speedup, utilization
from .parallel import WorkerPool
from .report import RunRecord
from .stream import SweepResult, run_hierarchy_sweep
from .timing import RepetitionPolicy, measure

log = logging.getLogger(__name__)

# bandwidth (B/s) of the DRAM baseline for a kernel running on the given thread count
BaselineFn = Callable[[int], float]

BLUR_TOLERANCE = 1e-4  # max-abs, for intensities on a [0, 1] scale
TRANSPOSE_CHECK_SIZE = 97


class CorrectnessError(RuntimeError):
    pass


class AgreementError(CorrectnessError):
    def __init__(self, a: str, b: str, deviation: float, tol: float):
        super().__init__(f"blur variants {a!r} and {b!r} disagree: max |diff| = {deviation:.3g} > {tol:.3g}")
        self.pair = (a, b)


@dataclass
class Skipped:
    what: str
    reason: str


@dataclass
class SuiteOutcome:
    records: List[RunRecord] = field(default_factory=list)
    skipped: List[Skipped] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def extend(self, other: "SuiteOutcome") -> None:
        self.records += other.records
        self.skipped += other.skipped
        self.errors += other.errors


def available_memory() -> Optional[int]:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):  # pragma: no cover
        return None


def baseline_from_sweep(sweep: SweepResult) -> BaselineFn:
    return lambda threads: select_baseline(sweep.measurements, threads).best_bandwidth


# --- stream ------------------------------------------------------------------

def stream_records(sweep: SweepResult, device: DeviceProfile) -> List[RunRecord]:
    return [
        RunRecord(
            suite="stream",
            variant=f"{m.kind.name}@{m.level.name}",
            device=device.name,
            n=m.n_elems,
            threads=m.threads,
            best_s=m.timing.best,
            median_s=m.timing.median,
            bytes_moved=m.bytes_per_sample,
            baseline_Bps=m.best_bandwidth,
        )
        for m in sweep.measurements
    ]


def run_stream_suite(device: DeviceProfile, policy: RepetitionPolicy) -> tuple:
    """Returns ``(SuiteOutcome, SweepResult)``; only all-levels-failed counts as an error."""
    sweep = run_hierarchy_sweep(device, policy, dram_single_core=True)
    outcome = SuiteOutcome(records=stream_records(sweep, device))
    for fail in sweep.failures:
        outcome.skipped.append(Skipped(f"stream {fail.kind.name if fail.kind else '*'}@{fail.level.name}",
                                       str(fail.error)))
    if not sweep.measurements:
        outcome.errors.append("stream: every level failed")
    return outcome, sweep


# --- transpose ---------------------------------------------------------------

# Timed matrices hold mat[i, j] = i*n + j (exact in float64 for n < 2**26), so
# the result can be checked slab by slab without a second n x n array.
_SLAB = 256


def fill_index_matrix(mat: np.ndarray) -> None:
    n = mat.shape[0]
    cols = np.arange(n, dtype=np.float64)
    for r0 in range(0, n, _SLAB):
        r = np.arange(r0, min(r0 + _SLAB, n), dtype=np.float64)[:, None]
        mat[r0:r0 + _SLAB] = r * n + cols


def check_index_matrix(mat: np.ndarray, transposed: bool) -> bool:
    n = mat.shape[0]
    cols = np.arange(n, dtype=np.float64)
    for r0 in range(0, n, _SLAB):
        r = np.arange(r0, min(r0 + _SLAB, n), dtype=np.float64)[:, None]
        want = cols * n + r if transposed else r * n + cols
        if not np.array_equal(mat[r0:r0 + _SLAB], want):
            return False
    return True


def precheck_transpose(variant: str, blk: int, threads: int, seed: int = 0) -> None:
    """Compare a variant against the out-of-place oracle on a small random matrix."""
    rng = np.random.default_rng(seed)
    mat = rng.random((TRANSPOSE_CHECK_SIZE, TRANSPOSE_CHECK_SIZE))
    want = tr.oracle_transpose(mat)
    tr.VARIANTS[variant](mat, blk, threads)
    if not np.array_equal(mat, want):
        raise CorrectnessError(f"transpose variant {variant!r} disagrees with the oracle")


def run_transpose_suite(
    device: DeviceProfile,
    sizes: Sequence[int],
    variants: Sequence[str],
    policy: RepetitionPolicy,
    *,
    blk: Optional[int] = None,
    threads: Optional[int] = None,
    baseline: Optional[BaselineFn] = None,
    seed: int = 0,
) -> SuiteOutcome:
    threads = threads or device.core_count
    blk = blk or tr.default_block_size(device)
    out = SuiteOutcome()
    unknown = [v for v in variants if v not in tr.VARIANTS]
    if unknown:
        out.errors.append(f"unknown transpose variants: {', '.join(unknown)}")
        return out

    valid = []
    for v in variants:
        try:
            precheck_transpose(v, blk, threads, seed)
            valid.append(v)
        except CorrectnessError as exc:
            log.error("%s", exc)
            out.errors.append(str(exc))

    for n in sizes:
        need = 8 * n * n
        avail = available_memory()
        if avail is not None and need > 0.8 * avail:
            reason = f"matrix needs {need} bytes, only {avail} available; does not fit in memory"
            log.warning("transpose n=%d skipped: %s", n, reason)
            out.skipped.append(Skipped(f"transpose n={n}", reason))
            continue
        mat = np.empty((n, n), dtype=np.float64)
        timings: Dict[str, object] = {}
        for v in valid:
            used = 1 if v in tr.SEQUENTIAL_VARIANTS else threads
            fill_index_matrix(mat)
            fn = tr.VARIANTS[v]
            with WorkerPool(used) as pool:
                stats = measure(lambda: fn(mat, blk, used, pool), policy)
            runs = policy.warmup_runs + len(stats.samples)
            if not check_index_matrix(mat, transposed=runs % 2 == 1):
                msg = f"transpose variant {v!r} produced a wrong result at n={n}"
                log.error("%s", msg)
                out.errors.append(msg)
                continue
            timings[v] = (stats, used)

        naive = timings.get("naive")
        moved = bytes_moved(TransposeWorkload(n))
        for v, (stats, used) in timings.items():
            rec = dict(suite="transpose", variant=v, device=device.name, n=n, blk=blk, threads=used,
                       best_s=stats.best, median_s=stats.median, bytes_moved=moved)
            if naive is not None:
                rec["speedup"] = speedup(naive[0].best, stats.best, v).speedup
            if baseline is not None:
                u = utilization(moved, stats.best, baseline(used), v)
                rec.update(baseline_Bps=u.stream_baseline, utilization=u.utilization)
                if u.overflow:
                    log.warning("transpose %s n=%d: utilization %.2f > 1 (working set cache resident?)",
                                v, n, u.utilization)
            out.records.append(RunRecord(**rec))
        del mat
    return out


# --- blur --------------------------------------------------------------------

def blur_tolerance(img: np.ndarray) -> float:
    return BLUR_TOLERANCE * max(1.0, float(np.abs(img).max()))


def check_agreement(results: Dict[str, np.ndarray], f: int, tol: float) -> float:
    """Largest pairwise interior deviation; raises :class:`AgreementError` past ``tol``."""
    names = list(results)
    worst = 0.0
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            dev = float(np.abs(blur_mod.interior(results[a], f) - blur_mod.interior(results[b], f)).max())
            if dev > tol:
                raise AgreementError(a, b, dev, tol)
            worst = max(worst, dev)
    return worst


def run_blur_suite(
    device: DeviceProfile,
    img: np.ndarray,
    variants: Sequence[str],
    policy: RepetitionPolicy,
    *,
    f: int = blur_mod.DEFAULT_FILTER_SIZE,
    sigma: Optional[float] = None,
    threads: Optional[int] = None,
    baseline: Optional[BaselineFn] = None,
) -> SuiteOutcome:
    threads = threads or device.core_count
    out = SuiteOutcome()
    unknown = [v for v in variants if v not in blur_mod.VARIANTS]
    if unknown:
        out.errors.append(f"unknown blur variants: {', '.join(unknown)}")
        return out
    kernel = blur_mod.make_gaussian_kernel(f, sigma)
    h, w, c = img.shape
    tol = blur_tolerance(img)

    # cheap agreement check on a crop before spending time on the full image
    crop = np.ascontiguousarray(img[:min(h, 4 * f), :min(w, 4 * f)])
    try:
        check_agreement({v: blur_mod.VARIANTS[v](crop, kernel, threads) for v in variants}, f, tol)
    except AgreementError as exc:
        log.error("%s", exc)
        out.errors.append(str(exc))
        return out

    results: Dict[str, np.ndarray] = {}
    timings = {}
    tmp = np.empty_like(img)
    for v in variants:
        used = 1 if v in blur_mod.SEQUENTIAL_VARIANTS else threads
        dst = np.empty_like(img)
        fn = blur_mod.VARIANTS[v]
        with WorkerPool(used) as pool:
            stats = measure(lambda: fn(img, kernel, used, out=dst, tmp=tmp, pool=pool), policy)
        results[v] = dst
        timings[v] = (stats, used)
    try:
        check_agreement(results, f, tol)
    except AgreementError as exc:
        log.error("%s", exc)
        out.errors.append(str(exc))
        return out

    naive = timings.get("naive")
    moved = bytes_moved(BlurWorkload(w, h, c, f))
    for v, (stats, used) in timings.items():
        rec = dict(suite="blur", variant=v, device=device.name, w=w, h=h, c=c, f=f, threads=used,
                   best_s=stats.best, median_s=stats.median, bytes_moved=moved)
        if naive is not None:
            rec["speedup"] = speedup(naive[0].best, stats.best, v).speedup
        if baseline is not None:
            u = utilization(moved, stats.best, baseline(used), v)
            rec.update(baseline_Bps=u.stream_baseline, utilization=u.utilization)
        out.records.append(RunRecord(**rec))
    return out
