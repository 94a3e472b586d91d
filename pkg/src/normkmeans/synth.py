"""Seeded synthetic benchmark: AR(1) prototypes, signed noisy members, background noise."""

from dataclasses import asdict, dataclass

import numpy as np

from .centroid import canonical_sign
from .metric import distance

__all__ = [
    "RejectionExhausted",
    "SynthDataset",
    "SynthSpec",
    "generate",
    "generate_prototype",
    "lag1_autocorrelation",
]

MAX_PROTOTYPE_ATTEMPTS = 1000


class RejectionExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n: int = 30
    num_classes: int = 2
    points_per_class: int = 200
    background_points: int = 400
    ar_coefficient: float = 0.9
    amplitude_range: tuple = (0.5, 2.0)
    signed: bool = True
    noise_sigma: float = 0.1
    min_prototype_separation: float = 0.7
    seed: int = 1

    def __post_init__(self):
        a_min, a_max = self.amplitude_range
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.num_classes < 0 or self.points_per_class < 0 or self.background_points < 0:
            raise ValueError("counts must be non-negative")
        if not -1.0 < self.ar_coefficient < 1.0:
            raise ValueError("ar_coefficient must lie in (-1, 1)")
        if not 0.0 < a_min <= a_max:
            raise ValueError("amplitude_range must satisfy 0 < a_min <= a_max")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0.0 <= self.min_prototype_separation <= 1.0:
            raise ValueError("min_prototype_separation must lie in [0, 1]")

    def to_dict(self):
        d = asdict(self)
        d["amplitude_range"] = list(self.amplitude_range)
        return d


@dataclass
class SynthDataset:
    signals: np.ndarray  # (N, n)
    true_labels: np.ndarray  # 0 = background, 1..C = class
    prototypes: np.ndarray  # (C, n), unit rows
    amplitudes: np.ndarray  # signed; 0 for background
    spec: SynthSpec


def generate_prototype(n, phi, rng):
    """Unit-norm, canonically signed AR(1) sequence ``p[t] = phi p[t-1] + w[t]``."""
    if not -1.0 < phi < 1.0:
        raise ValueError("AR coefficient must lie in (-1, 1)")
    w = rng.standard_normal(n)
    p = np.empty(n)
    p[0] = w[0]
    for t in range(1, n):
        p[t] = phi * p[t - 1] + w[t]
    return canonical_sign(p / np.linalg.norm(p))


def lag1_autocorrelation(p):
    """Lag-1 autocorrelation about zero, ``sum p[t] p[t+1] / sum p[t]^2``.

    The AR(1) process is zero mean by construction, so no sample mean is
    removed.
    """
    p = np.asarray(p, dtype=float)
    return float(p[:-1] @ p[1:] / (p @ p))


def _prototypes(spec, rng):
    protos = []
    for _ in range(MAX_PROTOTYPE_ATTEMPTS):
        if len(protos) == spec.num_classes:
            break
        cand = generate_prototype(spec.n, spec.ar_coefficient, rng)
        if all(distance(cand, p) >= spec.min_prototype_separation for p in protos):
            protos.append(cand)
    if len(protos) < spec.num_classes:
        raise RejectionExhausted(
            f"could not draw {spec.num_classes} prototypes with separation "
            f">= {spec.min_prototype_separation} in {MAX_PROTOTYPE_ATTEMPTS} attempts"
        )
    return np.array(protos).reshape(spec.num_classes, spec.n)


def generate(spec=None):
    """Draw a labeled dataset from ``spec`` (defaults reproduce the benchmark)."""
    spec = spec or SynthSpec()
    rng = np.random.default_rng(spec.seed)
    prototypes = _prototypes(spec, rng)

    C, m, B, n = spec.num_classes, spec.points_per_class, spec.background_points, spec.n
    labels = np.concatenate([np.repeat(np.arange(1, C + 1), m), np.zeros(B, dtype=int)])
    a_min, a_max = spec.amplitude_range
    mags = rng.uniform(a_min, a_max, size=C * m)
    if spec.signed:
        signs = np.where(rng.random(C * m) < 0.5, -1.0, 1.0)
    else:
        signs = np.ones(C * m)
    amplitudes = np.concatenate([mags * signs, np.zeros(B)])

    clean = np.zeros((C * m + B, n))
    if C:
        clean[: C * m] = amplitudes[: C * m, None] * prototypes[labels[: C * m] - 1]
    noise = spec.noise_sigma * rng.standard_normal((C * m + B, n))
    signals = clean + noise

    order = rng.permutation(C * m + B)
    return SynthDataset(
        signals=signals[order],
        true_labels=labels[order].astype(np.int64),
        prototypes=prototypes,
        amplitudes=amplitudes[order],
        spec=spec,
    )
