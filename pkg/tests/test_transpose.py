import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from membench.device import load_profile
from membench.transpose import (VARIANTS, MatrixError, default_block_size, oracle_transpose, transpose_blocked,
                                transpose_dynamic, transpose_manual_blocked, transpose_naive, transpose_parallel)


def brute_transpose(mat):
    n = mat.shape[0]
    out = np.empty_like(mat)
    for i in range(n):
        for j in range(n):
            out[j, i] = mat[i, j]
    return out


def test_two_by_two():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert transpose_naive(m).tolist() == [[1.0, 3.0], [2.0, 4.0]]
    assert oracle_transpose(np.array([[1.0, 2.0], [3.0, 4.0]])).tolist() == [[1.0, 3.0], [2.0, 4.0]]


def test_oracle_matches_brute(rng):
    m = rng.random((7, 7))
    assert np.array_equal(oracle_transpose(m), brute_transpose(m))
    assert np.array_equal(oracle_transpose(oracle_transpose(m)), m)
    one = np.array([[5.0]])
    assert np.array_equal(oracle_transpose(one), one)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_identity_unchanged(n):
    for fn in VARIANTS.values():
        assert np.array_equal(fn(np.eye(n), 2, 2), np.eye(n))


def test_naive_random(rng):
    m = rng.random((7, 7))
    want = oracle_transpose(m)
    assert np.array_equal(transpose_naive(m), want)


@pytest.mark.parametrize("threads", [1, 4, 100])
def test_parallel(rng, threads):
    m = rng.random((64, 64))
    ref = m.copy()
    transpose_naive(ref)
    assert np.array_equal(transpose_parallel(m, threads), ref)


@pytest.mark.parametrize("n,blk", [(8, 4), (10, 4), (10, 10), (12, 5), (16, 4)])
@pytest.mark.parametrize("fn", [transpose_blocked, transpose_manual_blocked, transpose_dynamic])
@pytest.mark.parametrize("threads", [1, 3])
def test_blocked_family(rng, fn, n, blk, threads):
    m = rng.random((n, n))
    want = oracle_transpose(m)
    assert np.array_equal(fn(m, blk, threads), want)


def test_constant_matrix_unchanged():
    m = np.full((8, 8), 2.5)
    assert np.array_equal(transpose_manual_blocked(m, 4), np.full((8, 8), 2.5))


def test_dynamic_matches_manual(rng):
    m = rng.random((33, 33))
    a, b = m.copy(), m.copy()
    transpose_manual_blocked(a, 8, 1)
    transpose_dynamic(b, 8, 3)
    assert np.array_equal(a, b)


def test_rejects_bad_input():
    with pytest.raises(MatrixError):
        transpose_naive(np.zeros((2, 3)))
    with pytest.raises(MatrixError):
        transpose_naive(np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(MatrixError):
        transpose_blocked(np.zeros((4, 4)), 0)


def test_default_block_size():
    assert default_block_size(load_profile("mango-pi-mq-pro")) == 32  # 32 KiB L1
    assert default_block_size(load_profile("xeon-4310T")) == 32  # 48 KiB: 64 would need 64 KiB
    assert default_block_size(None) == 32


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 70),
    blk=st.integers(1, 20),
    threads=st.integers(1, 4),
    variant=st.sampled_from(sorted(VARIANTS)),
    seed=st.integers(0, 2**32 - 1),
)
def test_properties(n, blk, threads, variant, seed):
    m = np.random.default_rng(seed).random((n, n))
    orig = m.copy()
    fn = VARIANTS[variant]
    fn(m, blk, threads)
    assert np.array_equal(m, oracle_transpose(orig))
    assert np.array_equal(np.sort(m, axis=None), np.sort(orig, axis=None))
    fn(m, blk, threads)
    assert np.array_equal(m, orig)
