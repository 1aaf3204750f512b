"""Gaussian blur ladder: naive 2-D convolution, unit-stride 2-D, separable
1-D kernels, memory-friendly separable passes, and the parallel version.

Every variant filters the valid region ``[m, h - m) x [m, w - m)`` (``m`` is
the kernel half-width) and copies border pixels from the input unchanged.
Accumulation is float32 with a fixed per-pixel summation order, so variants
that share an order agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Union

import numpy as np
from numba import njit

from .image import as_image
from .parallel import WorkerPool

DEFAULT_FILTER_SIZE = 19


class BlurError(ValueError):
    pass


def default_sigma(f: int) -> float:
    """Sigma used when none is given: 0.3 * ((f - 1) / 2 - 1) + 0.8."""
    return 0.3 * ((f - 1) * 0.5 - 1) + 0.8


@dataclass(frozen=True)
class GaussianKernel1D:
    f: int
    sigma: float
    weights: np.ndarray  # float32, length f

    @property
    def middle(self) -> int:
        return (self.f - 1) // 2

    def to_2d(self) -> "GaussianKernel2D":
        w = self.weights.astype(np.float64)
        return GaussianKernel2D(self.f, np.outer(w, w).astype(np.float32))


@dataclass(frozen=True)
class GaussianKernel2D:
    f: int
    weights: np.ndarray  # float32, (f, f)

    @property
    def middle(self) -> int:
        return (self.f - 1) // 2


def make_gaussian_kernel(f: int, sigma: Optional[float] = None) -> GaussianKernel1D:
    """Normalized odd-length Gaussian weights, mirrored so they are exactly symmetric."""
    if f < 1 or f % 2 == 0:
        raise BlurError(f"filter size must be a positive odd number, got {f}")
    if sigma is None:
        sigma = default_sigma(f)
    if not sigma > 0:
        raise BlurError(f"sigma must be positive, got {sigma}")
    m = (f - 1) // 2
    x = np.arange(-m, m + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w /= w.sum()
    w[m + 1:] = w[:m][::-1]
    weights = w.astype(np.float32)
    if np.any(weights <= 0):
        raise BlurError(f"sigma {sigma} too small for f={f}: tail weights underflow to zero")
    return GaussianKernel1D(f, float(sigma), weights)


KernelLike = Union[GaussianKernel1D, GaussianKernel2D, np.ndarray]


def _weights1d(k: KernelLike) -> np.ndarray:
    w = k.weights if isinstance(k, GaussianKernel1D) else np.asarray(k)
    if w.ndim != 1 or w.size % 2 == 0:
        raise BlurError("expected an odd-length 1-D kernel")
    return np.ascontiguousarray(w, dtype=np.float32)


def _weights2d(k: KernelLike) -> np.ndarray:
    if isinstance(k, GaussianKernel1D):
        k = k.to_2d()
    w = k.weights if isinstance(k, GaussianKernel2D) else np.asarray(k)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] % 2 == 0:
        raise BlurError("expected an odd square 2-D kernel")
    return np.ascontiguousarray(w, dtype=np.float32)


def _prepare(img, f: int, out: Optional[np.ndarray]) -> np.ndarray:
    as_image(img)
    h, w, _ = img.shape
    if f > min(w, h):
        raise BlurError(f"kernel size {f} exceeds image size {w}x{h}")
    if out is None:
        out = np.empty_like(img)
    elif out.shape != img.shape or out.dtype != np.float32 or not out.flags.c_contiguous:
        raise BlurError("out must match the image shape and be C-contiguous float32")
    out[...] = img  # border policy: unfiltered pixels keep their input values
    return out


def _tmp_buffer(img, tmp: Optional[np.ndarray]) -> np.ndarray:
    if tmp is None:
        return np.empty_like(img)
    if tmp.shape != img.shape or tmp.dtype != np.float32:
        raise BlurError("tmp must match the image shape and be float32")
    return tmp


# --- kernels -----------------------------------------------------------------

@njit(nogil=True, cache=True)
def _naive(src, k2d, out):
    # neighborhood walked column by column (kernel row innermost), channel innermost
    h, w, c = src.shape
    f = k2d.shape[0]
    m = (f - 1) // 2
    acc = np.zeros(c, dtype=np.float32)
    for i in range(m, h - m):
        for j in range(m, w - m):
            for ch in range(c):
                acc[ch] = np.float32(0.0)
            for jf in range(f):
                for i_f in range(f):
                    wt = k2d[i_f, jf]
                    for ch in range(c):
                        acc[ch] += src[i - m + i_f, j - m + jf, ch] * wt
            for ch in range(c):
                out[i, j, ch] = acc[ch]


@njit(nogil=True, cache=True)
def _unit_stride(src2, k2d, out2, c):
    # same taps and per-pixel order as _naive; innermost loop walks a contiguous row
    h, wc = src2.shape
    f = k2d.shape[0]
    m = (f - 1) // 2
    x0, x1 = m * c, wc - m * c
    n = x1 - x0
    acc = np.zeros(n, dtype=np.float32)
    for i in range(m, h - m):
        acc[:] = np.float32(0.0)
        for jf in range(f):
            for i_f in range(f):
                wt = k2d[i_f, jf]
                srow = src2[i - m + i_f, jf * c:jf * c + n]
                for x in range(n):
                    acc[x] += srow[x] * wt
        out2[i, x0:x1] = acc


@njit(nogil=True, cache=True)
def _separable(src, k, tmp, out):
    h, w, c = src.shape
    f = k.shape[0]
    m = (f - 1) // 2
    for i in range(m, h - m):
        for j in range(w):
            for ch in range(c):
                acc = np.float32(0.0)
                for t in range(f):
                    acc += src[i - m + t, j, ch] * k[t]
                tmp[i, j, ch] = acc
    for i in range(m, h - m):
        for j in range(m, w - m):
            for ch in range(c):
                acc = np.float32(0.0)
                for t in range(f):
                    acc += tmp[i, j - m + t, ch] * k[t]
                out[i, j, ch] = acc


@njit(nogil=True, cache=True)
def _vertical_rows(src2, k, tmp2, lo, hi):
    # rows lo..hi of the valid range [0, h - f + 1); result lands at row i + m
    wc = src2.shape[1]
    f = k.shape[0]
    m = (f - 1) // 2
    for i in range(lo, hi):
        trow = tmp2[i + m]
        trow[:] = np.float32(0.0)
        for i_f in range(f):
            wt = k[i_f]
            srow = src2[i + i_f]
            for x in range(wc):
                trow[x] += srow[x] * wt


@njit(nogil=True, cache=True)
def _horizontal_rows(tmp2, k, out2, c, lo, hi):
    wc = tmp2.shape[1]
    f = k.shape[0]
    m = (f - 1) // 2
    x0, x1 = m * c, wc - m * c
    n = x1 - x0
    for i in range(lo, hi):
        orow = out2[i, x0:x1]
        orow[:] = np.float32(0.0)
        for t in range(f):
            wt = k[t]
            trow = tmp2[i, t * c:t * c + n]
            for x in range(n):
                orow[x] += trow[x] * wt


# --- variants ----------------------------------------------------------------

def blur_naive(img: np.ndarray, k2d: KernelLike, *, out: Optional[np.ndarray] = None) -> np.ndarray:
    """Direct 2-D convolution, O(W*H*C*F^2), with a cache-hostile column-wise tap walk."""
    k = _weights2d(k2d)
    out = _prepare(img, k.shape[0], out)
    _naive(img, k, out)
    return out


def blur_unit_stride(img: np.ndarray, k2d: KernelLike, *, out: Optional[np.ndarray] = None) -> np.ndarray:
    """2-D convolution with loops reordered so the innermost loop is unit stride."""
    k = _weights2d(k2d)
    out = _prepare(img, k.shape[0], out)
    h, w, c = img.shape
    _unit_stride(img.reshape(h, w * c), k, out.reshape(h, w * c), c)
    return out


def blur_separable(img: np.ndarray, k1d: KernelLike, *, out: Optional[np.ndarray] = None,
                   tmp: Optional[np.ndarray] = None) -> np.ndarray:
    """Vertical then horizontal 1-D pass, one output pixel at a time, O(W*H*C*F)."""
    k = _weights1d(k1d)
    out = _prepare(img, k.size, out)
    _separable(img, k, _tmp_buffer(img, tmp), out)
    return out


def _separable_passes(img, k, out, tmp, pool: WorkerPool) -> np.ndarray:
    h, w, c = img.shape
    f = k.size
    m = (f - 1) // 2
    src2, tmp2, out2 = img.reshape(h, w * c), tmp.reshape(h, w * c), out.reshape(h, w * c)
    pool.run_static(lambda lo, hi: _vertical_rows(src2, k, tmp2, lo, hi), h - f + 1)
    # run_static returns only after every worker finished the vertical pass
    pool.run_static(lambda lo, hi: _horizontal_rows(tmp2, k, out2, c, m + lo, m + hi), h - 2 * m)
    return out


def blur_separable_mem(img: np.ndarray, k1d: KernelLike, *, out: Optional[np.ndarray] = None,
                       tmp: Optional[np.ndarray] = None) -> np.ndarray:
    """Separable passes where each kernel tap streams a whole contiguous row."""
    k = _weights1d(k1d)
    out = _prepare(img, k.size, out)
    with WorkerPool(1) as pool:
        return _separable_passes(img, k, out, _tmp_buffer(img, tmp), pool)


def blur_parallel(img: np.ndarray, k1d: KernelLike, threads: int = 1, *, out: Optional[np.ndarray] = None,
                  tmp: Optional[np.ndarray] = None, pool: Optional[WorkerPool] = None) -> np.ndarray:
    """:func:`blur_separable_mem` with the row loop of each pass split statically over threads."""
    k = _weights1d(k1d)
    out = _prepare(img, k.size, out)
    tmp = _tmp_buffer(img, tmp)
    if pool is not None:
        if pool.threads != threads:
            raise ValueError(f"pool has {pool.threads} threads, {threads} requested")
        return _separable_passes(img, k, out, tmp, pool)
    with WorkerPool(threads) as own:
        return _separable_passes(img, k, out, tmp, own)


# name -> fn(img, k1d, threads, out=None, tmp=None, pool=None)
VARIANTS: Dict[str, Callable[..., np.ndarray]] = {
    "naive": lambda img, k, threads, out=None, tmp=None, pool=None: blur_naive(img, k, out=out),
    "unit_stride": lambda img, k, threads, out=None, tmp=None, pool=None: blur_unit_stride(img, k, out=out),
    "1d_kernels": lambda img, k, threads, out=None, tmp=None, pool=None: blur_separable(img, k, out=out, tmp=tmp),
    "memory": lambda img, k, threads, out=None, tmp=None, pool=None: blur_separable_mem(img, k, out=out, tmp=tmp),
    "parallel": lambda img, k, threads, out=None, tmp=None, pool=None: blur_parallel(
        img, k, threads, out=out, tmp=tmp, pool=pool),
}

SEQUENTIAL_VARIANTS = frozenset({"naive", "unit_stride", "1d_kernels", "memory"})


def interior(img: np.ndarray, f: int) -> np.ndarray:
    """View of the pixels filtered by every variant (at least ``m`` from each edge)."""
    m = (f - 1) // 2
    h, w, _ = img.shape
    return img[m:h - m, m:w - m, :]
