"""
Gaussian blur, from a 2-D stencil to separable passes
=====================================================

A 19-tap Gaussian costs 361 multiply-adds per pixel as a 2-D stencil and
38 as two 1-D passes. The remaining rungs change memory order and threading.
"""

# %%
import numpy as np

from membench import RepetitionPolicy, make_gaussian_kernel, measure, synth_image
from membench.blur import VARIANTS, interior
from membench.parallel import available_cores

img = synth_image(1024, 768, 3, "random", seed=3)
kernel = make_gaussian_kernel(19)
print("sigma =", kernel.sigma, " weights sum to", float(kernel.weights.astype(np.float64).sum()))

# %%
# All variants filter the same valid region and copy the border through.
results = {name: fn(img, kernel, available_cores()) for name, fn in VARIANTS.items()}
ref = interior(results["naive"], 19)
for name, out in results.items():
    print(f"{name:>12}: max deviation from naive {np.abs(interior(out, 19) - ref).max():.2e}")

# %%
# Time each rung. The 2-D variants are slow, so they get fewer repetitions.
times = {}
for name, fn in VARIANTS.items():
    reps = 1 if name in ("naive", "unit_stride") else 5
    times[name] = measure(lambda: fn(img, kernel, available_cores()), RepetitionPolicy(1, reps)).best
for name, t in times.items():
    print(f"{name:>12}: {t * 1e3:9.2f} ms  x{times['naive'] / t:.1f}")

# %%
# Blurring a flat image is a good sanity check: the output must stay flat.
flat = synth_image(64, 64, 1, "constant", value=0.25)
print("flat image stays flat:", bool(np.allclose(VARIANTS["memory"](flat, kernel, 1), 0.25, atol=1e-6)))
