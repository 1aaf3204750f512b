"""
Five ways to transpose a matrix in place
========================================

Each rung of the ladder keeps the same answer and changes only the order in
which memory is touched.
"""

# %%
import numpy as np

from membench import RepetitionPolicy, measure, oracle_transpose
from membench.metrics import TransposeWorkload, bytes_moved, speedup
from membench.parallel import available_cores
from membench.transpose import VARIANTS

n, blk = 2048, 32
threads = available_cores()
rng = np.random.default_rng(0)
original = rng.standard_normal((n, n))

# %%
# Every variant must match the out-of-place reference bit for bit.
for name, fn in VARIANTS.items():
    mat = original.copy()
    fn(mat, blk, threads)
    assert np.array_equal(mat, oracle_transpose(original)), name

# %%
# The naive loop walks a column with stride ``n`` for every row, so each
# access to the mirror element lands on a different cache line. Blocking
# works on ``blk x blk`` tiles that fit in L1.
policy = RepetitionPolicy(warmup_runs=1, measured_runs=5)
mat = original.copy()
best = {}
for name, fn in VARIANTS.items():
    best[name] = measure(lambda: fn(mat, blk, threads), policy).best

moved = bytes_moved(TransposeWorkload(n))
for name, t in best.items():
    print(f"{name:>16}: {t * 1e3:8.2f} ms  {moved / t / 1e9:6.2f} GB/s  "
          f"x{speedup(best['naive'], t).speedup:.2f}")

# %%
# Block size matters less than blocking at all, as long as a pair of tiles
# fits comfortably in the first-level cache.
for b in (8, 16, 32, 64, 128):
    t = measure(lambda: VARIANTS["blocking"](mat, b, threads), policy).best
    print(f"blk={b:>3}: {t * 1e3:.2f} ms")
