import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from membench.blur import (VARIANTS, BlurError, blur_naive, blur_parallel, blur_separable, blur_separable_mem,
                           blur_unit_stride, default_sigma, interior, make_gaussian_kernel)
from membench.image import synth_image


def conv2d_oracle(img, k2d):
    """Valid-region 2-D convolution in float64, borders copied (written independently of the package)."""
    img64 = img.astype(np.float64)
    k = np.asarray(k2d, dtype=np.float64)
    f = k.shape[0]
    m = f // 2
    h, w, _ = img.shape
    out = img64.copy()
    for i in range(m, h - m):
        for j in range(m, w - m):
            patch = img64[i - m:i + m + 1, j - m:j + m + 1, :]
            out[i, j, :] = np.tensordot(k, patch, axes=([0, 1], [0, 1]))
    return out


def k2d_of(k1):
    return np.outer(k1.weights.astype(np.float64), k1.weights.astype(np.float64))


def test_kernel_f1():
    k = make_gaussian_kernel(1, 0.5)
    assert k.weights.tolist() == [1.0]


def test_kernel_f3():
    k = make_gaussian_kernel(3, 0.8)
    w = k.weights
    assert w[0] == w[2] and w[1] > w[0]
    assert abs(float(w.astype(np.float64).sum()) - 1.0) <= 1e-6


def test_kernel_f19():
    k = make_gaussian_kernel(19)
    assert k.weights.size == 19 and k.middle == 9
    assert np.array_equal(k.weights, k.weights[::-1])
    assert abs(float(k.weights.astype(np.float64).sum()) - 1.0) <= 1e-6
    assert k.sigma == pytest.approx(0.3 * (9 - 1) + 0.8)


@pytest.mark.parametrize("f,sigma", [(2, 1.0), (0, 1.0), (3, 0.0), (3, -1.0)])
def test_kernel_bad_params(f, sigma):
    with pytest.raises(BlurError):
        make_gaussian_kernel(f, sigma)


def test_kernel_2d_is_outer_product():
    k = make_gaussian_kernel(5)
    k2 = k.to_2d()
    assert np.array_equal(k2.weights, k2d_of(k).astype(np.float32))
    assert abs(float(k2.weights.astype(np.float64).sum()) - 1.0) <= 1e-6


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_constant_image(name):
    img = synth_image(20, 17, 3, "constant", value=0.5)
    out = VARIANTS[name](img, make_gaussian_kernel(5), 2)
    assert np.abs(out - 0.5).max() <= 1e-5


def test_impulse_imprints_kernel():
    img = synth_image(5, 5, 1, "impulse")
    k = make_gaussian_kernel(3, 0.8)
    out = blur_naive(img, k.to_2d())
    assert np.allclose(out[1:4, 1:4, 0], k.to_2d().weights, atol=0, rtol=0)
    sep = blur_separable(img, k)
    assert np.abs(sep[1:4, 1:4, 0] - k.to_2d().weights).max() <= 1e-6


def test_naive_matches_oracle():
    img = synth_image(32, 32, 3, "random", seed=3)
    k = make_gaussian_kernel(5)
    out = blur_naive(img, k.to_2d())
    assert np.abs(out - conv2d_oracle(img, k.to_2d().weights)).max() <= 1e-5


def test_unit_stride_bit_exact_with_naive():
    img = synth_image(23, 19, 3, "random", seed=4)
    k = make_gaussian_kernel(5).to_2d()
    assert np.array_equal(blur_unit_stride(img, k), blur_naive(img, k))


def test_unit_stride_matches_oracle():
    img = synth_image(16, 16, 1, "random", seed=5)
    k = make_gaussian_kernel(3).to_2d()
    assert np.abs(blur_unit_stride(img, k) - conv2d_oracle(img, k.weights)).max() <= 1e-5


def test_separable_matches_oracle_f19():
    img = synth_image(64, 64, 3, "random", seed=6)
    k = make_gaussian_kernel(19)
    out = blur_separable(img, k)
    ref = conv2d_oracle(img, k2d_of(k))
    assert np.abs(interior(out, 19) - interior(ref, 19)).max() <= 1e-4


def test_separable_mem_matches_separable():
    img = synth_image(40, 30, 3, "random", seed=7)
    k = make_gaussian_kernel(7)
    assert np.abs(blur_separable_mem(img, k) - blur_separable(img, k)).max() <= 1e-5


def test_mem_bottom_rows_unfiltered():
    img = synth_image(30, 30, 1, "random", seed=8)
    k = make_gaussian_kernel(5)
    out = blur_separable_mem(img, k)
    assert np.array_equal(out[-2:], img[-2:])
    assert np.array_equal(out[:2], img[:2])
    assert np.array_equal(out[:, :2], img[:, :2]) and np.array_equal(out[:, -2:], img[:, -2:])
    assert not np.array_equal(out[2], img[2])


@pytest.mark.parametrize("threads", [1, 4, 100])
def test_parallel_bit_exact(threads):
    img = synth_image(64, 48, 3, "random", seed=9)
    k = make_gaussian_kernel(5)
    assert np.array_equal(blur_parallel(img, k, threads), blur_separable_mem(img, k))


def test_kernel_larger_than_image():
    img = synth_image(8, 8, 1, "random")
    with pytest.raises(BlurError):
        blur_separable(img, make_gaussian_kernel(9))


def test_default_sigma():
    assert default_sigma(3) == pytest.approx(0.8)


@settings(max_examples=25, deadline=None)
@given(
    w=st.integers(5, 40), h=st.integers(5, 40), c=st.sampled_from([1, 3]),
    f=st.sampled_from([3, 5]), seed=st.integers(0, 10_000),
    alpha=st.floats(-2, 2), beta=st.floats(-2, 2),
    name=st.sampled_from(sorted(VARIANTS)),
)
def test_blur_properties(w, h, c, f, seed, alpha, beta, name):
    a = synth_image(w, h, c, "random", seed=seed)
    b = synth_image(w, h, c, "random", seed=seed + 1)
    k = make_gaussian_kernel(f)
    fn = VARIANTS[name]
    out = fn(a, k, 2)
    assert out.min() >= a.min() - 1e-5 and out.max() <= a.max() + 1e-5
    combo = (np.float32(alpha) * a + np.float32(beta) * b).astype(np.float32)
    lhs = interior(fn(combo, k, 2), f)
    rhs = interior(np.float32(alpha) * out + np.float32(beta) * fn(b, k, 2), f)
    assert np.abs(lhs - rhs).max() <= 1e-4
