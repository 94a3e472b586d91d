import numpy as np
import pytest

from normkmeans.extract import RankDeficientBank, ShapeMismatch, amplitude_image, extract
from oracles import normal_equations


def test_exact_span():
    f1 = np.array([1.0, 0.0, 0.0, 0.0])
    f2 = np.array([0.0, 0.6, 0.8, 0.0])
    out = extract(2 * f1 - 3 * f2, np.vstack([f1, f2]))
    np.testing.assert_allclose(out.weights, [2, -3], atol=1e-12)
    assert out.residual_norm[0] <= 1e-10


def test_orthogonal_signal():
    F = np.eye(5)[:2]
    s = np.array([0.0, 0.0, 3.0, 4.0, 0.0])
    out = extract(s, F)
    np.testing.assert_array_equal(out.weights, [0.0, 0.0])
    assert out.residual_norm[0] == pytest.approx(5.0, rel=1e-15)


def test_against_normal_equations(rng):
    for _ in range(10):
        F = rng.standard_normal((4, 30))
        s = rng.standard_normal(30)
        got = extract(s, F).weights
        ref = normal_equations(F.T, s)
        np.testing.assert_allclose(got, ref, rtol=1e-8, atol=1e-12)


def test_batch_matches_single(rng):
    F = rng.standard_normal((3, 12))
    S = rng.standard_normal((7, 12))
    batch = extract(S, F)
    for j in range(7):
        np.testing.assert_allclose(batch.weights[j], extract(S[j], F).weights, rtol=1e-12)


def test_linearity_and_polarity(rng):
    F = rng.standard_normal((3, 20))
    s, t = rng.standard_normal((2, 20))
    a, b = 1.7, -0.4
    lhs = extract(a * s + b * t, F).weights
    rhs = a * extract(s, F).weights + b * extract(t, F).weights
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)
    np.testing.assert_array_equal(extract(-s, F).weights, -extract(s, F).weights)


def test_rank_deficient():
    f = np.array([1.0, 2.0, 3.0])
    with pytest.raises(RankDeficientBank):
        extract(f, np.vstack([f, 2 * f]))
    with pytest.raises(RankDeficientBank):
        extract(np.ones(2), np.eye(3)[:, :2].T.repeat(2, axis=0)[:3, :2])


def test_amplitude_image_constant():
    W = np.tile([1.5, -2.0, 0.0, 3.0], (6, 1))
    img = amplitude_image(W, 3, 2, [0, 1, 2])
    assert img.shape == (2, 3, 3)
    np.testing.assert_array_equal(img[..., 0], 1.0)
    np.testing.assert_array_equal(img[..., 1], 1.0)
    np.testing.assert_array_equal(img[..., 2], 0.0)


def test_amplitude_image_single_pixels():
    W = np.zeros((12, 3))
    W[1, 0], W[5, 1], W[10, 2] = 4.0, -0.5, 2.0
    img = amplitude_image(W, 4, 3, [0, 1, 2])
    flat = img.reshape(-1, 3)
    for ch, pix in enumerate((1, 5, 10)):
        assert np.count_nonzero(flat[:, ch]) == 1
        assert flat[pix, ch] == 1.0


def test_amplitude_image_sign_invariant(rng):
    W = rng.standard_normal((20, 4))
    flips = rng.choice([-1.0, 1.0], 20)
    np.testing.assert_array_equal(amplitude_image(W, 5, 4, [3, 0, 1]),
                                  amplitude_image(W * flips[:, None], 5, 4, [3, 0, 1]))


def test_amplitude_image_errors():
    W = np.ones((6, 3))
    with pytest.raises(ShapeMismatch):
        amplitude_image(W, 4, 2, [0, 1, 2])
    with pytest.raises(ShapeMismatch):
        amplitude_image(W, 3, 2, [0, 0, 1])
    with pytest.raises(ShapeMismatch):
        amplitude_image(W, 3, 2, [0, 1, 3])


def test_amplitude_image_reproduces_layout(rng):
    # 3 classes laid out in vertical bands on a 12x9 grid
    n, width, height = 30, 12, 9
    F = np.linalg.qr(rng.standard_normal((n, 3)))[0].T
    cls = np.repeat(np.arange(3), 4)[None, :].repeat(height, axis=0).ravel()
    amp = rng.uniform(0.5, 2.0, cls.size) * rng.choice([-1, 1], cls.size)
    S = amp[:, None] * F[cls] + 0.05 * rng.standard_normal((cls.size, n))
    img = amplitude_image(extract(S, F).weights, width, height, [0, 1, 2]).reshape(-1, 3)
    # per-class mean intensity of each channel, painted back onto the grid
    means = np.array([img[cls == c].mean(axis=0) for c in range(3)])
    painted = means[cls]
    for c in range(3):
        mask = (cls == c).astype(float)
        assert np.corrcoef(painted[:, c], mask)[0, 1] >= 0.9
