"""Cluster centroids as the dominant direction of a cluster and its negation.

The centroid of a cluster S is the first principal component of the union
S ∪ (-S).  That union has exactly zero mean, and each pair ``±s``
contributes ``2 s s^T`` to its covariance, so the centroid is simply the
top eigenvector of the uncentered scatter ``sum_s s s^T`` of S.  High
amplitude members dominate the scatter; low-amplitude background noise
barely moves it.
"""

import numpy as np

from .metric import eps_norm

__all__ = [
    "AllDegenerate",
    "EmptyCluster",
    "ZeroMatrix",
    "canonical_sign",
    "compute_centroid",
    "scatter_matrix",
    "top_eigenvector",
]

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000


class EmptyCluster(ValueError):
    pass


class AllDegenerate(ValueError):
    pass


class ZeroMatrix(ValueError):
    pass


def canonical_sign(v):
    """Flip ``v`` (1-D) or each row of ``v`` (2-D) so its largest-|entry| is positive.

    Ties between equally large entries go to the lowest index.
    """
    v = np.array(v, dtype=float)
    rows = np.atleast_2d(v)
    pivot = np.argmax(np.abs(rows), axis=1)
    signs = np.where(rows[np.arange(rows.shape[0]), pivot] < 0, -1.0, 1.0)
    rows *= signs[:, None]
    return rows.reshape(v.shape)


def scatter_matrix(X):
    """Uncentered scatter ``X^T X`` of the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X.T @ X


def _power(M, v, tol, max_iter):
    for _ in range(max_iter):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return v, False
        w /= nw
        # sine of the angle between successive iterates, sign-agnostic
        step = min(np.linalg.norm(w - v), np.linalg.norm(w + v))
        v = w
        if step <= tol:
            return v, True
    return v, False


def top_eigenvector(M, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Dominant eigenvector of a symmetric PSD matrix by power iteration.

    The first run starts from the largest-norm column of ``M``.  A second
    run from a fixed dense vector guards against that column being
    orthogonal to the dominant eigenvector; the run with the larger
    Rayleigh quotient wins, the first on ties.  The result is unit norm and
    canonically signed.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    if np.linalg.norm(M) <= eps_norm(n) ** 2:
        raise ZeroMatrix("matrix is (numerically) zero")

    col_norms = np.linalg.norm(M, axis=0)
    j = int(np.argmax(col_norms))
    starts = [M[:, j] / col_norms[j]]
    probe = np.cos(1.0 + np.arange(n) * 0.7548776662466927)
    starts.append(probe / np.linalg.norm(probe))

    best, best_q = None, 0.0
    for v0 in starts:
        v, _ = _power(M, v0.copy(), tol, max_iter)
        q = float(v @ M @ v)
        if best is None or q > best_q + 1e-12 * abs(best_q):
            best, best_q = v, q
    return canonical_sign(best)


def compute_centroid(members):
    """Unit, canonically signed centroid of the rows of ``members``."""
    X = np.atleast_2d(np.asarray(members, dtype=float))
    if X.shape[0] == 0 or X.size == 0:
        raise EmptyCluster("cannot compute the centroid of an empty cluster")
    norms = np.linalg.norm(X, axis=1)
    if not np.any(norms > eps_norm(X.shape[1])):
        raise AllDegenerate("every cluster member is numerically zero")
    return top_eigenvector(scatter_matrix(X))
