"""Normalized, polarity-agnostic K-Means for learning signal shapes."""

__version__ = "0.1.0"

from .baselines import PcaResult, angular_kmeans, euclidean_kmeans, pca  # noqa: E402
from .centroid import canonical_sign, compute_centroid, top_eigenvector  # noqa: E402
from .cluster import ClusterConfig, ClusterResult, fit  # noqa: E402
from .evaluation import MatchReport, evaluate, match_features, project_to_plane  # noqa: E402
from .extract import FeatureAmplitudes, amplitude_image, extract  # noqa: E402
from .metric import DegenerateNorm, angle, distance, distance_to_bank  # noqa: E402
from .synth import SynthDataset, SynthSpec, generate  # noqa: E402

__all__ = [
    "ClusterConfig",
    "ClusterResult",
    "DegenerateNorm",
    "FeatureAmplitudes",
    "MatchReport",
    "PcaResult",
    "SynthDataset",
    "SynthSpec",
    "amplitude_image",
    "angle",
    "angular_kmeans",
    "canonical_sign",
    "compute_centroid",
    "distance",
    "distance_to_bank",
    "euclidean_kmeans",
    "evaluate",
    "extract",
    "fit",
    "generate",
    "match_features",
    "pca",
    "project_to_plane",
    "top_eigenvector",
]
