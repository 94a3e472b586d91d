"""Reference methods: PCA, angular-distance (spherical) K-Means, Euclidean K-Means.

The two K-Means variants reuse the iteration scaffolding of
:func:`normkmeans.cluster.lloyd`, so they differ from the normalized method
only in how distances and centroids are defined.
"""

from dataclasses import dataclass

import numpy as np

from .centroid import canonical_sign
from .cluster import ClusterConfig, lloyd
from .metric import eps_norm, unit_rows

__all__ = ["PcaResult", "angular_kmeans", "euclidean_kmeans", "pca"]


@dataclass
class PcaResult:
    components: np.ndarray  # (k, n), orthonormal rows
    singular_values: np.ndarray  # descending
    mean: np.ndarray

    @property
    def rank_deficient(self):
        return bool(np.any(self.singular_values < 1e-12))

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.components.T


def pca(X, num_components):
    """Top principal directions of the mean-centered rows of ``X``.

    Components are canonically signed.  Singular values below 1e-12 flag a
    rank-deficient input (see ``PcaResult.rank_deficient``); that is not an
    error.
    """
    X = np.asarray(X, dtype=float)
    N, n = X.shape
    if N < 2:
        raise ValueError("PCA needs at least 2 signals")
    if not 1 <= num_components <= min(N, n):
        raise ValueError(f"num_components must be in [1, {min(N, n)}]")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=False)
    return PcaResult(
        components=canonical_sign(Vt[:num_components]),
        singular_values=s[:num_components],
        mean=mean,
    )


def _config(k, seed, max_iterations, moves_criterion, difference_criterion, n_init):
    return ClusterConfig(
        k=k,
        seed=seed,
        max_iterations=max_iterations,
        moves_criterion=moves_criterion,
        difference_criterion=difference_criterion,
        n_init=n_init,
    )


def angular_kmeans(X, k, seed=0, max_iterations=100, moves_criterion=0,
                   difference_criterion=1e-6, n_init=10):
    """Spherical K-Means with cosine dissimilarity ``1 - cos``.

    Signals are projected to the unit sphere and centroids are the
    normalized mean of their members, so ``s`` and ``-s`` sit at the
    maximum distance 2 and never share a cluster by choice.  Degenerate
    signals are at distance 2 from every centroid.
    """
    X = np.asarray(X, dtype=float)
    U, viable = unit_rows(X)
    n = X.shape[1]

    def distances(_, C):
        D = 1.0 - U @ C.T
        D[~viable] = 2.0
        return np.clip(D, 0.0, 2.0)

    def centroid_of(members):
        # members are rows of U here
        m = members.sum(axis=0) / members.shape[0]
        norm = np.linalg.norm(m)
        if norm <= eps_norm(n):
            return None
        return m / norm

    result = lloyd(
        U,
        _config(k, seed, max_iterations, moves_criterion, difference_criterion, n_init),
        distances=distances,
        centroid_of=centroid_of,
        seed_vector=lambda u: u.copy(),
        viable=viable,
        method="angular-kmeans",
    )
    return result


def euclidean_kmeans(X, k, seed=0, max_iterations=100, moves_criterion=0,
                     difference_criterion=1e-6, n_init=10):
    """Lloyd's K-Means: squared-Euclidean assignment, mean centroids.

    The recorded residual is the mean Euclidean distance to the assigned
    centroid.
    """
    X = np.asarray(X, dtype=float)
    viable = np.ones(X.shape[0], dtype=bool)

    def distances(Y, C):
        d2 = ((Y[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        return np.sqrt(d2)

    return lloyd(
        X,
        _config(k, seed, max_iterations, moves_criterion, difference_criterion, n_init),
        distances=distances,
        centroid_of=lambda members: members.mean(axis=0),
        seed_vector=lambda x: x.copy(),
        viable=viable,
        method="euclidean-kmeans",
    )
