"""In-place square matrix transposition: naive, parallel, blocked,
manually-staged blocks, and dynamically scheduled blocks.

Matrices are C-contiguous ``(n, n)`` float64 arrays; every variant works in
place and returns its argument.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional

import numpy as np
from numba import njit

from .device import DeviceProfile
from .parallel import WorkerPool

DEFAULT_BLOCK = 32


class MatrixError(ValueError):
    pass


def as_square_matrix(mat) -> np.ndarray:
    if not isinstance(mat, np.ndarray) or mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise MatrixError(f"expected a square 2-D array, got shape {getattr(mat, 'shape', None)}")
    if mat.shape[0] < 1:
        raise MatrixError("matrix must be at least 1x1")
    if mat.dtype != np.float64 or not mat.flags.c_contiguous:
        raise MatrixError("matrix must be C-contiguous float64")
    return mat


def default_block_size(device: Optional[DeviceProfile] = None) -> int:
    """Largest power of two whose tile and mirror tile fit in half the smallest data cache."""
    if device is None or not device.caches:
        return DEFAULT_BLOCK
    budget = min(l.capacity for l in device.caches) // 2
    blk = 1
    while 2 * (2 * blk) ** 2 * 8 <= budget:
        blk *= 2
    return blk


def _check_block(blk: int) -> int:
    if blk < 1:
        raise MatrixError(f"block size must be >= 1, got {blk}")
    return blk


# --- kernels -----------------------------------------------------------------

@njit(nogil=True, cache=True)
def _naive_rows(m, lo, hi):
    n = m.shape[0]
    for i in range(lo, hi):
        for j in range(i + 1, n):
            t = m[i, j]
            m[i, j] = m[j, i]
            m[j, i] = t


@njit(nogil=True, cache=True)
def _blocked_rows(m, blk, lo, hi):
    # lo, hi index block rows
    n = m.shape[0]
    for bi in range(lo, hi):
        i0 = bi * blk
        i1 = min(i0 + blk, n)
        for j0 in range(i0, n, blk):
            j1 = min(j0 + blk, n)
            for i in range(i0, i1):
                # strict upper triangle, globally
                for j in range(max(j0, i + 1), j1):
                    t = m[i, j]
                    m[i, j] = m[j, i]
                    m[j, i] = t


@njit(nogil=True, cache=True)
def _manual_rows(m, blk, lo, hi):
    n = m.shape[0]
    tile = np.empty(blk * blk, dtype=m.dtype)
    staged = np.empty(blk * blk, dtype=m.dtype)
    for bi in range(lo, hi):
        i0 = bi * blk
        ib = min(blk, n - i0)
        # diagonal block: transpose in place
        for r in range(ib):
            for c in range(r + 1, ib):
                t = m[i0 + r, i0 + c]
                m[i0 + r, i0 + c] = m[i0 + c, i0 + r]
                m[i0 + c, i0 + r] = t
        for j0 in range(i0 + blk, n, blk):
            jb = min(blk, n - j0)
            # load block (i0, j0), ib x jb, row-sequential reads
            for r in range(ib):
                for c in range(jb):
                    tile[r * jb + c] = m[i0 + r, j0 + c]
            # transpose in scratch -> jb x ib
            for c in range(jb):
                for r in range(ib):
                    staged[c * ib + r] = tile[r * jb + c]
            # swap with the mirror block (j0, i0)
            for c in range(jb):
                for r in range(ib):
                    t = m[j0 + c, i0 + r]
                    m[j0 + c, i0 + r] = staged[c * ib + r]
                    staged[c * ib + r] = t
            # transpose the mirror block and store it at (i0, j0)
            for r in range(ib):
                for c in range(jb):
                    tile[r * jb + c] = staged[c * ib + r]
            for r in range(ib):
                for c in range(jb):
                    m[i0 + r, j0 + c] = tile[r * jb + c]


def _n_blocks(n: int, blk: int) -> int:
    return -(-n // blk)


def _with_pool(threads: int, pool: Optional[WorkerPool]):
    if pool is not None:
        if pool.threads != threads:
            raise ValueError(f"pool has {pool.threads} threads, {threads} requested")
        return pool, False
    return WorkerPool(threads), True


def _run(threads, pool, fn):
    pool, owned = _with_pool(threads, pool)
    try:
        fn(pool)
    finally:
        if owned:
            pool.close()


# --- variants ----------------------------------------------------------------

def transpose_naive(mat: np.ndarray) -> np.ndarray:
    """Swap every strict-upper-triangle element with its mirror, row by row."""
    as_square_matrix(mat)
    _naive_rows(mat, 0, mat.shape[0])
    return mat


def transpose_parallel(mat: np.ndarray, threads: int = 1, *, pool: Optional[WorkerPool] = None) -> np.ndarray:
    """Naive traversal with outer rows split into contiguous static chunks."""
    as_square_matrix(mat)
    n = mat.shape[0]
    _run(threads, pool, lambda p: p.run_static(lambda lo, hi: _naive_rows(mat, lo, hi), n))
    return mat


def transpose_blocked(mat: np.ndarray, blk: int = DEFAULT_BLOCK, threads: int = 1, *,
                      pool: Optional[WorkerPool] = None) -> np.ndarray:
    """Tile-by-tile traversal of the upper block triangle; block rows split statically."""
    as_square_matrix(mat)
    n = mat.shape[0]
    blk = min(_check_block(blk), n)
    _run(threads, pool, lambda p: p.run_static(lambda lo, hi: _blocked_rows(mat, blk, lo, hi), _n_blocks(n, blk)))
    return mat


def transpose_manual_blocked(mat: np.ndarray, blk: int = DEFAULT_BLOCK, threads: int = 1, *,
                             pool: Optional[WorkerPool] = None) -> np.ndarray:
    """Stage each off-diagonal tile in a scratch buffer, transpose it there and
    exchange it with its mirror tile; diagonal tiles are transposed in place."""
    as_square_matrix(mat)
    n = mat.shape[0]
    blk = min(_check_block(blk), n)
    _run(threads, pool, lambda p: p.run_static(lambda lo, hi: _manual_rows(mat, blk, lo, hi), _n_blocks(n, blk)))
    return mat


def transpose_dynamic(mat: np.ndarray, blk: int = DEFAULT_BLOCK, threads: int = 1, *,
                      pool: Optional[WorkerPool] = None) -> np.ndarray:
    """Same work as :func:`transpose_manual_blocked`, but workers claim block
    rows one at a time from a shared counter to even out the triangle."""
    as_square_matrix(mat)
    n = mat.shape[0]
    blk = min(_check_block(blk), n)
    _run(threads, pool, lambda p: p.run_dynamic(lambda bi: _manual_rows(mat, blk, bi, bi + 1), _n_blocks(n, blk)))
    return mat


def oracle_transpose(mat: np.ndarray) -> np.ndarray:
    """Out-of-place reference: a fresh array with ``out[j, i] = mat[i, j]``."""
    as_square_matrix(mat)
    n = mat.shape[0]
    out = np.empty_like(mat)
    for i in range(n):
        out[:, i] = mat[i, :]
    return out


VariantFn = Callable[..., np.ndarray]

# name -> fn(mat, blk, threads, pool)
VARIANTS: Dict[str, VariantFn] = {
    "naive": lambda mat, blk, threads, pool=None: transpose_naive(mat),
    "parallel": lambda mat, blk, threads, pool=None: transpose_parallel(mat, threads, pool=pool),
    "blocking": lambda mat, blk, threads, pool=None: transpose_blocked(mat, blk, threads, pool=pool),
    "manual_blocking": lambda mat, blk, threads, pool=None: transpose_manual_blocked(mat, blk, threads, pool=pool),
    "dynamic": lambda mat, blk, threads, pool=None: transpose_dynamic(mat, blk, threads, pool=pool),
}

# variants that run on a single thread regardless of the thread count
SEQUENTIAL_VARIANTS = frozenset({"naive"})
