"""
Scoring runs and drawing the charts
===================================

Speedup compares each variant with its naive rung. Utilization divides the
bandwidth a kernel achieves by the best DRAM bandwidth STREAM reached on the
same thread count.
"""

# %%
from pathlib import Path

from membench import RunRecord, emit_csv, utilization
from membench.metrics import BlurWorkload, TransposeWorkload, bytes_moved
from membench.report import parse_csv, render_chart, time_chart, utilization_chart

# %%
# The traffic model counts one read and one write of every element.
print("transpose n=8192:", bytes_moved(TransposeWorkload(8192)), "bytes")
print("blur 2544x2027x3:", bytes_moved(BlurWorkload(2544, 2027, 3, 19)), "bytes")

# %%
# A kernel that moves 1 GiB in 0.5 s against a 4 GiB/s baseline uses half of
# it. A cache-resident working set can beat DRAM; that case is flagged.
print(utilization(2**30, 0.5, 2**32))
print(utilization(2**30, 0.1, 2**32))

# %%
# Records serialize to a fixed CSV schema and come back unchanged.
records = [
    RunRecord("transpose", v, "demo", n=8192, blk=32, threads=1, best_s=t, bytes_moved=2**30,
              baseline_Bps=4.0e9, utilization=2**30 / t / 4.0e9, speedup=2.6 / t)
    for v, t in [("naive", 2.6), ("parallel", 1.95), ("blocking", 0.39), ("manual_blocking", 0.48),
                 ("dynamic", 0.37)]
]
data = emit_csv(records)
assert parse_csv(data) == records
print(data.decode().splitlines()[0])

# %%
# Charts are plain SVG and byte-identical for the same input.
out = Path("gallery_output")
out.mkdir(exist_ok=True)
(out / "transpose_time.svg").write_bytes(render_chart(time_chart(records, "transpose")))
(out / "utilization.svg").write_bytes(render_chart(utilization_chart(records)))
