"""Scoring learned features and memberships against ground truth.

Feature matching uses |cos| between learned and true directions, since a
feature and its negation describe the same shape.  Membership accuracy is
measured over class points only; background points carry no class.
"""

from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .metric import eps_norm

__all__ = [
    "DegenerateBasis",
    "LengthMismatch",
    "MatchReport",
    "abs_cos_matrix",
    "best_assignment",
    "best_membership_permutation",
    "confusion_matrix",
    "evaluate",
    "match_features",
    "membership_accuracy",
    "project_to_plane",
]

EXHAUSTIVE_MAX = 8


class LengthMismatch(ValueError):
    pass


class DegenerateBasis(ValueError):
    pass


@dataclass
class MatchReport:
    """``permutation[i]`` is the true prototype index (0-based) matched to
    learned feature ``i``, or -1 when there are more learned features than
    prototypes.  Class label ``c`` corresponds to prototype ``c - 1``."""

    permutation: np.ndarray
    per_pair_abs_cos: np.ndarray
    mean_abs_cos: float
    membership_accuracy: Optional[float] = None
    membership_permutation: Optional[np.ndarray] = None
    confusion: Optional[np.ndarray] = None
    method: str = ""


def abs_cos_matrix(learned, truth):
    L = np.atleast_2d(np.asarray(learned, dtype=float))
    T = np.atleast_2d(np.asarray(truth, dtype=float))
    if L.shape[1] != T.shape[1]:
        raise ValueError("learned and true features must share a dimension")
    Ln = L / np.linalg.norm(L, axis=1, keepdims=True)
    Tn = T / np.linalg.norm(T, axis=1, keepdims=True)
    return np.clip(np.abs(Ln @ Tn.T), 0.0, 1.0)


def best_assignment(score, exhaustive=None):
    """Row -> column map maximizing the total ``score`` (rows may exceed columns).

    Exhaustive search when the larger side is at most 8 (first maximum in
    lexicographic order wins), Hungarian assignment otherwise.  Unmatched
    rows map to -1.
    """
    score = np.asarray(score, dtype=float)
    R, C = score.shape
    if exhaustive is None:
        exhaustive = max(R, C) <= EXHAUSTIVE_MAX
    mapping = np.full(R, -1, dtype=np.int64)
    if exhaustive:
        best, best_total = None, -np.inf
        if R <= C:
            for cols in permutations(range(C), R):
                total = score[np.arange(R), list(cols)].sum()
                if total > best_total:
                    best, best_total = cols, total
            mapping[:] = best
        else:
            for rows in permutations(range(R), C):
                total = score[list(rows), np.arange(C)].sum()
                if total > best_total:
                    best, best_total = rows, total
            mapping[list(best)] = np.arange(C)
    else:
        rows, cols = linear_sum_assignment(score, maximize=True)
        mapping[rows] = cols
    return mapping


def match_features(learned, truth, exhaustive=None):
    """Pair learned features with true prototypes to maximize total |cos|."""
    S = abs_cos_matrix(learned, truth)
    perm = best_assignment(S, exhaustive=exhaustive)
    matched = np.flatnonzero(perm >= 0)
    per_pair = S[matched, perm[matched]]
    return MatchReport(
        permutation=perm,
        per_pair_abs_cos=per_pair,
        mean_abs_cos=float(per_pair.mean()),
    )


def confusion_matrix(labels, true_labels, k, num_classes):
    """Counts of class points: rows are classes 1..C, columns clusters 0..K-1."""
    labels = np.asarray(labels)
    true_labels = np.asarray(true_labels)
    if labels.shape != true_labels.shape:
        raise LengthMismatch("labels and true labels differ in length")
    M = np.zeros((num_classes, k), dtype=np.int64)
    mask = true_labels > 0
    np.add.at(M, (true_labels[mask] - 1, labels[mask]), 1)
    return M


def best_membership_permutation(labels, true_labels, k, num_classes):
    """Cluster -> prototype index map maximizing correctly grouped class points."""
    M = confusion_matrix(labels, true_labels, k, num_classes)
    return best_assignment(M.T)


def membership_accuracy(labels, true_labels, permutation):
    """Fraction of class points whose cluster maps to their true class.

    Returns ``None`` when there are no class points.
    """
    labels = np.asarray(labels)
    true_labels = np.asarray(true_labels)
    if labels.shape != true_labels.shape:
        raise LengthMismatch("labels and true labels differ in length")
    mask = true_labels > 0
    if not mask.any():
        return None
    mapped = np.asarray(permutation)[labels[mask]] + 1
    return float(np.mean(mapped == true_labels[mask]))


def evaluate(learned, truth, labels=None, true_labels=None, method=""):
    """Full report: feature matching plus, when labels are given, memberships."""
    report = match_features(learned, truth)
    report.method = method
    if labels is not None and true_labels is not None:
        k = np.atleast_2d(learned).shape[0]
        C = np.atleast_2d(truth).shape[0]
        perm = best_membership_permutation(labels, true_labels, k, C)
        report.membership_permutation = perm
        report.membership_accuracy = membership_accuracy(labels, true_labels, perm)
        report.confusion = confusion_matrix(labels, true_labels, k, C)
    return report


def project_to_plane(X, basis_a, basis_b):
    """Coordinates of each row of ``X`` in the plane spanned by two vectors.

    The basis is orthonormalized by Gram-Schmidt with ``basis_a`` first.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    a = np.asarray(basis_a, dtype=float)
    b = np.asarray(basis_b, dtype=float)
    tol = eps_norm(a.shape[0])
    na = np.linalg.norm(a)
    if na <= tol:
        raise DegenerateBasis("first basis vector is zero")
    e1 = a / na
    b_perp = b - (e1 @ b) * e1
    nb = np.linalg.norm(b_perp)
    if nb <= 1e-10 * max(np.linalg.norm(b), tol):
        raise DegenerateBasis("basis vectors are linearly dependent")
    e2 = b_perp / nb
    return np.column_stack([X @ e1, X @ e2])
