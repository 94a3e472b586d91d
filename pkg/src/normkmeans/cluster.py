"""Normalized, polarity-agnostic K-Means.

Each iteration assigns every signal to the centroid at the smallest sine
distance, records the mean residual, then replaces each centroid with the
dominant direction of its members (see :mod:`normkmeans.centroid`).  The
loop stops when few enough signals change cluster, when the mean residual
stops changing, or at an iteration cap.

The iteration scaffolding in :func:`lloyd` is shared with the baseline
K-Means variants so comparisons differ only in distance and centroid rule.
"""

from dataclasses import dataclass, field

import numpy as np

from .centroid import canonical_sign, compute_centroid
from .metric import distance_matrix, unit_rows

__all__ = [
    "ClusterConfig",
    "ClusterResult",
    "NoViableInit",
    "TooFewSignals",
    "fit",
    "handle_empty_cluster",
    "lloyd",
]

MOVES = "MovesCriterion"
DIFFERENCE = "DifferenceCriterion"
MAX_ITERATIONS = "MaxIterations"


class TooFewSignals(ValueError):
    pass


class NoViableInit(ValueError):
    pass


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    moves_criterion: int = 0
    difference_criterion: float = 1e-6
    max_iterations: int = 100
    seed: int = 0
    n_init: int = 10

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if int(self.moves_criterion) != self.moves_criterion or self.moves_criterion < 0:
            raise ValueError("moves_criterion must be a non-negative integer")
        if not self.difference_criterion >= 0:
            raise ValueError("difference_criterion must be non-negative")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if int(self.n_init) != self.n_init or self.n_init < 1:
            raise ValueError("n_init must be a positive integer")


@dataclass
class ClusterResult:
    """Outcome of one clustering run.

    ``labels`` come from the last membership update and ``centroids`` from
    the centroid update that followed it, so at termination they can be
    half an iteration apart.  Labels are 0-based cluster indices.
    """

    labels: np.ndarray
    centroids: np.ndarray
    residual_history: list = field(default_factory=list)
    moves_history: list = field(default_factory=list)
    termination: str = MAX_ITERATIONS
    method: str = "normalized-kmeans"
    restart: int = 0

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def iterations(self):
        return len(self.residual_history)

    @property
    def mean_residual(self):
        return self.residual_history[-1]


def handle_empty_cluster(residuals, viable, taken=()):
    """Index of the signal to re-seed an empty cluster from.

    ``residuals`` holds each signal's distance to the nearest surviving
    centroid.  Picks the viable signal with the largest one, skipping
    indices already used this round; ties go to the lowest index.
    """
    score = np.where(viable, residuals, -np.inf)
    if len(taken):
        score[np.asarray(list(taken), dtype=int)] = -np.inf
    if not np.any(np.isfinite(score)):
        score = np.where(viable, residuals, -np.inf)
    return int(np.argmax(score))


def lloyd(X, config, *, distances, centroid_of, seed_vector, viable, method):
    """Run the generic assign/update loop ``config.n_init`` times.

    ``distances(X, C)`` gives the (N, K) distance matrix, ``centroid_of(rows)``
    gives a centroid or ``None`` when the members define none, and
    ``seed_vector(x)`` turns one signal into a centroid.

    Every restart draws its initial centroids from one generator seeded with
    ``config.seed``; the run with the lowest final mean residual is kept,
    the earliest on ties.
    """
    N = X.shape[0]
    K = config.k
    if N < K:
        raise TooFewSignals(f"need at least k={K} signals, got {N}")
    candidates = np.flatnonzero(viable)
    if candidates.size < K:
        raise NoViableInit(f"only {candidates.size} non-degenerate signals for k={K}")

    rng = np.random.default_rng(config.seed)
    best = None
    for r in range(config.n_init):
        picks = rng.choice(candidates, size=K, replace=False)
        result = _single_run(X, config, picks, distances, centroid_of, seed_vector, viable)
        result.method = method
        result.restart = r
        if best is None or result.mean_residual < best.mean_residual:
            best = result
    return best


def _single_run(X, config, picks, distances, centroid_of, seed_vector, viable):
    N = X.shape[0]
    K = config.k
    centroids = np.stack([seed_vector(X[j]) for j in picks])

    labels = np.full(N, -1, dtype=np.int64)
    residual_history, moves_history = [], []
    prev = 0.0
    termination = MAX_ITERATIONS
    for it in range(1, config.max_iterations + 1):
        D = distances(X, centroids)
        new_labels = np.argmin(D, axis=1).astype(np.int64)
        moves = int(np.count_nonzero(new_labels != labels))
        labels = new_labels
        residuals = D[np.arange(N), labels]
        mu = float(residuals.mean())
        delta = mu - prev
        prev = mu
        residual_history.append(mu)
        moves_history.append(moves)

        updated = centroids.copy()
        empty = []
        for i in range(K):
            members = X[labels == i]
            c = centroid_of(members) if members.shape[0] else None
            if c is None:
                empty.append(i)
            else:
                updated[i] = c
        if empty:
            # farthest point from the centroids as they stand after this update
            filled = [i for i in range(K) if i not in empty]
            if filled:
                D_new = distances(X, updated[filled])
                current = np.min(D_new, axis=1)
            else:
                current = residuals.copy()
            reseeded = []
            for i in empty:
                j = handle_empty_cluster(current, viable, reseeded)
                reseeded.append(j)
                updated[i] = seed_vector(X[j])
                current = np.minimum(current, distances(X, updated[i:i + 1])[:, 0])
        centroids = updated

        if moves <= config.moves_criterion:
            termination = MOVES
            break
        if it > 1 and abs(delta) <= config.difference_criterion:
            termination = DIFFERENCE
            break

    return ClusterResult(
        labels=labels,
        centroids=centroids,
        residual_history=residual_history,
        moves_history=moves_history,
        termination=termination,
    )


def _normalized_seed(x):
    return canonical_sign(x / np.linalg.norm(x))


def _principal_centroid(members):
    _, ok = unit_rows(members)
    if not ok.any():
        return None
    return compute_centroid(members)


def fit(X, config):
    """Cluster the rows of ``X`` (N signals of dimension n) into ``config.k`` shapes."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("signals must be an (N, n) array with n >= 2")
    if not np.all(np.isfinite(X)):
        raise ValueError("signals contain non-finite values")
    _, viable = unit_rows(X)
    return lloyd(
        X,
        config,
        distances=distance_matrix,
        centroid_of=_principal_centroid,
        seed_vector=_normalized_seed,
        viable=viable,
        method="normalized-kmeans",
    )
