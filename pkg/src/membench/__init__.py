"""Memory-bound kernel benchmarks: STREAM bandwidth sweeps, in-place matrix
transposition and Gaussian blur optimization ladders, and their scoring by
speedup over the naive variant and relative memory-bandwidth utilization."""

from .blur import (GaussianKernel1D, GaussianKernel2D, blur_naive, blur_parallel, blur_separable,
                   blur_separable_mem, blur_unit_stride, make_gaussian_kernel)
from .device import DeviceProfile, MemoryLevel, load_profile, shipped_profiles
from .image import load_ppm, save_ppm, synth_image
from .metrics import bytes_moved, speedup, utilization
from .report import RunRecord, emit_csv, emit_json, render_chart
from .stream import StreamKind, run_hierarchy_sweep, run_stream_test, size_for_level
from .timing import RepetitionPolicy, TimingStats, measure
from .transpose import (oracle_transpose, transpose_blocked, transpose_dynamic, transpose_manual_blocked,
                        transpose_naive, transpose_parallel)

__version__ = "0.1.0"
