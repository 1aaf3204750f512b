"""Monotonic timing and the warm-up/repetition policy shared by every kernel."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

MAX_CLOCK_RESOLUTION = 1e-6  # seconds

now = time.perf_counter


class MeasurementError(RuntimeError):
    pass


class ClockResolutionError(MeasurementError):
    pass


@dataclass(frozen=True)
class RepetitionPolicy:
    warmup_runs: int = 2
    measured_runs: int = 10
    time_budget: Optional[float] = None  # seconds, caps the measured phase

    def __post_init__(self):
        if self.measured_runs < 1:
            raise ValueError(f"measured_runs must be >= 1, got {self.measured_runs}")
        if self.warmup_runs < 0:
            raise ValueError(f"warmup_runs must be >= 0, got {self.warmup_runs}")
        if self.time_budget is not None and not self.time_budget > 0:
            raise ValueError(f"time_budget must be positive, got {self.time_budget}")

    @property
    def total_runs(self) -> int:
        return self.warmup_runs + self.measured_runs


@dataclass(frozen=True)
class TimingStats:
    samples: tuple
    best: float
    worst: float
    median: float

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "TimingStats":
        if len(samples) == 0:
            raise MeasurementError("no timing samples collected")
        ordered = sorted(samples)
        # even count: lower-middle element
        median = ordered[(len(ordered) - 1) // 2]
        stats = cls(tuple(samples), ordered[0], ordered[-1], median)
        if not stats.best > 0:
            raise MeasurementError(f"non-positive sample time {stats.best!r}")
        return stats


def check_clock() -> float:
    """Return the timer resolution, raising if it is coarser than 1 us."""
    info = time.get_clock_info("perf_counter")
    if not info.monotonic:
        raise ClockResolutionError("perf_counter is not monotonic on this platform")
    if info.resolution > MAX_CLOCK_RESOLUTION:
        raise ClockResolutionError(
            f"timer resolution {info.resolution:g} s exceeds {MAX_CLOCK_RESOLUTION:g} s; "
            "refusing to report timings"
        )
    return info.resolution


def measure(work: Callable[[], object], policy: RepetitionPolicy = RepetitionPolicy()) -> TimingStats:
    """Run ``work`` ``policy.warmup_runs`` times untimed, then time each measured run.

    The measured phase stops early once the cumulative measured time exceeds
    ``policy.time_budget`` (at least one sample is always taken).
    """
    check_clock()
    for _ in range(policy.warmup_runs):
        work()

    samples = []
    spent = 0.0
    for _ in range(policy.measured_runs):
        t0 = now()
        work()
        dt = now() - t0
        samples.append(dt)
        spent += dt
        if policy.time_budget is not None and spent > policy.time_budget:
            break
    return TimingStats.from_samples(samples)
