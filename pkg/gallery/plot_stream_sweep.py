"""
Bandwidth of each memory level
==============================

Run the four STREAM kernels against every level of a small device
description and look at how the achieved bandwidth falls off as the
working set moves from L1 out to DRAM.
"""

# %%
# A device is a list of memory levels, fastest first. Per-core caches are
# measured on one thread and scaled by the core count; shared levels are
# measured with every core busy.
from pathlib import Path

from membench import DeviceProfile, MemoryLevel, RepetitionPolicy, StreamKind, run_hierarchy_sweep, size_for_level
from membench.report import render_chart, stream_chart
from membench.suites import stream_records

device = DeviceProfile("demo", core_count=2, levels=(
    MemoryLevel("L1", 32 << 10),
    MemoryLevel("L2", 1 << 20),
    MemoryLevel("DRAM", 1 << 30, shared=True),
))

# %%
# Array lengths come from the sizing rule: a cache level gets the largest
# working set that fills at most half of it while staying four times larger
# than the level above.
for level in device.levels:
    n = size_for_level(level, device, StreamKind.TRIAD)
    print(f"{level.name:>4}: TRIAD uses n={n:,} ({3 * 8 * n / 1024:,.0f} KiB)")

# %%
# Two warm-up runs and five measured runs keep this quick; only the best
# sample counts.
sweep = run_hierarchy_sweep(device, RepetitionPolicy(warmup_runs=2, measured_runs=5))
for m in sweep:
    print(f"{m.kind.name:>5} @ {m.level.name:<4} {m.best_bandwidth / 1e9:7.2f} GB/s  ({m.mode.value})")

# %%
# The same numbers as a grouped bar chart.
out = Path("gallery_output")
out.mkdir(exist_ok=True)
(out / "stream.svg").write_bytes(render_chart(stream_chart(stream_records(sweep, device))))
