"""Feature-amplitude extraction by least squares on a learned feature basis.

Each signal is written as ``s = F @ alpha + r`` with the features as the
columns of ``F``; ``alpha`` is the least-squares solution (the pseudo-inverse
applied to ``s`` when ``F`` has full column rank).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "FeatureAmplitudes",
    "RankDeficientBank",
    "ShapeMismatch",
    "amplitude_image",
    "extract",
]

MIN_SINGULAR_VALUE = 1e-10


class RankDeficientBank(ValueError):
    """The feature bank has (near-)duplicate or dependent features."""


class ShapeMismatch(ValueError):
    pass


@dataclass
class FeatureAmplitudes:
    weights: np.ndarray  # (N, K)
    residual_norm: np.ndarray  # (N,)


def extract(signals, bank):
    """Least-squares feature weights for every signal.

    ``signals`` is (N, n) or a single length-n vector; ``bank`` is (K, n)
    with one feature per row.
    """
    S = np.asarray(signals, dtype=float)
    single = S.ndim == 1
    S = np.atleast_2d(S)
    F = np.atleast_2d(np.asarray(bank, dtype=float)).T  # (n, K)
    n, K = F.shape
    if S.shape[1] != n:
        raise ShapeMismatch(f"signals have {S.shape[1]} samples, features have {n}")
    if K > n:
        raise RankDeficientBank(f"{K} features cannot be independent in {n} dimensions")
    smin = np.linalg.svd(F, compute_uv=False).min()
    if smin <= MIN_SINGULAR_VALUE:
        raise RankDeficientBank(f"smallest singular value of the feature matrix is {smin:.3g}")

    Q, R = np.linalg.qr(F)
    alpha = solve_triangular(R, Q.T @ S.T).T
    resid = np.linalg.norm(S - alpha @ F.T, axis=1)
    if single:
        return FeatureAmplitudes(weights=alpha[0], residual_norm=resid[:1])
    return FeatureAmplitudes(weights=alpha, residual_norm=resid)


def amplitude_image(weights, width, height, channels):
    """RGB raster from the absolute amplitudes of three features.

    Pixels are in row-major order.  Each channel is scaled by its own
    maximum; a channel whose maximum is zero stays zero.  Returns a
    (height, width, 3) float array in [0, 1].
    """
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2:
        raise ShapeMismatch("weights must be an (N, K) array")
    if width * height != W.shape[0]:
        raise ShapeMismatch(f"{width}x{height} grid does not hold {W.shape[0]} pixels")
    channels = [int(c) for c in channels]
    if len(channels) != 3 or len(set(channels)) != 3:
        raise ShapeMismatch("channel map needs three distinct feature indices")
    if any(c < 0 or c >= W.shape[1] for c in channels):
        raise ShapeMismatch(f"channel index out of range for {W.shape[1]} features")

    A = np.abs(W[:, channels])
    peak = A.max(axis=0)
    scaled = np.divide(A, peak, out=np.zeros_like(A), where=peak > 0)
    return scaled.reshape(height, width, 3)
