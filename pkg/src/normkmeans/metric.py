"""Scale-invariant, polarity-agnostic distance between signals.

A signal ``s`` is treated as a vector in R^n; only its direction up to sign
matters.  The distance between two signals is the sine of the angle between
them, so ``d(s, -s) == 0`` and ``d(c * s, t) == d(s, t)``.

Angles are evaluated with the half-angle form
``theta = 2 * atan2(|u - v|, |u + v|)`` on the unit vectors ``u`` and ``v``.
It agrees with ``arccos(<u, v>)`` and stays accurate where the arccos
argument is close to +-1, which is exactly the regime clustering lives in.
"""

import numpy as np

__all__ = [
    "DegenerateNorm",
    "angle",
    "distance",
    "distance_matrix",
    "distance_to_bank",
    "eps_norm",
    "unit_rows",
]

# Rows per block when evaluating a distance matrix; bounds the (rows, K, n)
# temporaries.
_BLOCK = 4096


class DegenerateNorm(ValueError):
    """Raised when a signal is too close to zero to have a direction."""


def eps_norm(n):
    """Norm threshold below which an ``n``-dimensional vector is directionless."""
    return 1e-12 * np.sqrt(n)


def _as_signal(v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError("a signal must be a 1-D vector with at least 2 samples")
    if not np.all(np.isfinite(v)):
        raise ValueError("signal contains non-finite values")
    return v


def _unit(v):
    norm = np.linalg.norm(v)
    if norm <= eps_norm(v.shape[0]):
        raise DegenerateNorm(f"signal norm {norm:.3g} is below the degeneracy threshold")
    return v / norm


def unit_rows(X):
    """Normalize each row of ``X`` to unit length.

    Returns ``(U, ok)`` where ``ok`` flags rows whose norm exceeds
    :func:`eps_norm`; degenerate rows of ``U`` are left as zeros.
    """
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    ok = norms > eps_norm(X.shape[1])
    U = np.zeros_like(X)
    U[ok] = X[ok] / norms[ok, None]
    return U, ok


def _half_angle_terms(U, F):
    # |u - f| and |u + f| for every (row, centroid) pair.
    diff = np.linalg.norm(U[:, None, :] - F[None, :, :], axis=2)
    summ = np.linalg.norm(U[:, None, :] + F[None, :, :], axis=2)
    return diff, summ


def _sine(diff, summ):
    # sin(2 * atan2(x, y)) == 2xy / (x^2 + y^2)
    denom = diff * diff + summ * summ
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, 2.0 * diff * summ / denom, 1.0)
    return np.clip(s, 0.0, 1.0)


def angle(v1, v2):
    """Angle in ``[0, pi]`` between two signals."""
    u = _unit(_as_signal(v1))
    w = _unit(_as_signal(v2))
    if u.shape != w.shape:
        raise ValueError("signals must share a dimension")
    x = np.linalg.norm(u - w)
    y = np.linalg.norm(u + w)
    return float(2.0 * np.arctan2(x, y))


def distance(v1, v2):
    """Polarity-agnostic distance ``sin(angle(v1, v2))``, in ``[0, 1]``."""
    u = _unit(_as_signal(v1))
    w = _unit(_as_signal(v2))
    if u.shape != w.shape:
        raise ValueError("signals must share a dimension")
    diff, summ = _half_angle_terms(u[None, :], w[None, :])
    return float(_sine(diff, summ)[0, 0])


def distance_matrix(X, bank):
    """Distances from every row of ``X`` to every unit centroid in ``bank``.

    Degenerate rows get distance 1.0 to every centroid rather than raising,
    so all-zero background signals never abort a clustering run.
    """
    U, ok = unit_rows(np.atleast_2d(X))
    F = np.atleast_2d(np.asarray(bank, dtype=float))
    if F.shape[1] != U.shape[1]:
        raise ValueError("signals and centroids must share a dimension")
    D = np.ones((U.shape[0], F.shape[0]))
    idx = np.flatnonzero(ok)
    for start in range(0, idx.size, _BLOCK):
        rows = idx[start:start + _BLOCK]
        D[rows] = _sine(*_half_angle_terms(U[rows], F))
    return D


def distance_to_bank(v, bank):
    """Nearest centroid to ``v``: returns ``(index, distance)``.

    Ties go to the lowest index.  A degenerate ``v`` yields ``(0, 1.0)``.
    """
    F = np.atleast_2d(np.asarray(bank, dtype=float))
    if F.shape[0] == 0:
        raise ValueError("centroid bank is empty")
    d = distance_matrix(_as_signal(v)[None, :], F)[0]
    i = int(np.argmin(d))
    return i, float(d[i])
