"""Acceptance gates, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL`` line with the measured
numbers, then asserts.  Run just this file with::

    pytest -m acceptance -s tests/test_acceptance.py
"""

import time
from pathlib import Path

import numpy as np
import pytest

from normkmeans.baselines import angular_kmeans, pca
from normkmeans.centroid import compute_centroid
from normkmeans.cli import run
from normkmeans.cluster import ClusterConfig, fit
from normkmeans.evaluation import evaluate, match_features
from normkmeans.extract import extract
from normkmeans.metric import angle, distance
from normkmeans.synth import SynthSpec, generate, generate_prototype, lag1_autocorrelation
from oracles import abs_cos, union_centroid

pytestmark = pytest.mark.acceptance

SEEDS = range(20)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def sweep():
    rows = []
    for seed in SEEDS:
        data = generate(SynthSpec(seed=seed))
        t0 = time.perf_counter()
        prop = fit(data.signals, ClusterConfig(k=2, seed=seed))
        elapsed = time.perf_counter() - t0
        ang = angular_kmeans(data.signals, 2, seed=seed)
        rows.append({
            "elapsed": elapsed,
            "proposed": evaluate(prop.centroids, data.prototypes, prop.labels, data.true_labels),
            "angular": evaluate(ang.centroids, data.prototypes, ang.labels, data.true_labels),
            "pca": match_features(pca(data.signals, 2).components, data.prototypes),
        })
    return rows


def test_criterion_1_prototype_recovery(sweep, report):
    cos = np.array([r["proposed"].mean_abs_cos for r in sweep])
    slowest = max(r["elapsed"] for r in sweep)
    good = int(np.sum(cos >= 0.98))
    report(1, good >= 18 and slowest < 1.0,
           f"{good}/20 seeds with mean |cos| >= 0.98 (min {cos.min():.4f}), "
           f"slowest run {slowest:.3f} s")


def test_criterion_2_baseline_failure(sweep, report):
    pca_worse = sum(r["pca"].mean_abs_cos < r["proposed"].mean_abs_cos for r in sweep)
    ang_worse = sum(r["angular"].membership_accuracy < r["proposed"].membership_accuracy
                    for r in sweep)
    acc_ok = sum(r["proposed"].membership_accuracy >= 0.95 for r in sweep)
    report(2, pca_worse >= 18 and ang_worse >= 18 and acc_ok >= 18,
           f"(a) PCA below proposed {pca_worse}/20, (b) angular below proposed "
           f"{ang_worse}/20, (c) proposed accuracy >= 0.95 {acc_ok}/20")


def test_criterion_3_antipodal_grouping(report):
    e1, e2 = np.eye(2)
    X = np.vstack([e1, -e1, e2, -e2])
    prop = fit(X, ClusterConfig(k=2, seed=0))
    grouped = prop.labels[0] == prop.labels[1] and prop.labels[2] == prop.labels[3] \
        and prop.labels[0] != prop.labels[2]
    ang = angular_kmeans(X, 2, seed=0)
    split = ang.labels[0] != ang.labels[1] or ang.labels[2] != ang.labels[3]
    report(3, grouped and prop.mean_residual <= 1e-12 and split,
           f"proposed labels {prop.labels.tolist()} mu_r={prop.mean_residual:.1e}; "
           f"angular labels {ang.labels.tolist()}")


def test_criterion_4_centroid_oracle(report):
    rng = np.random.default_rng(4)
    worst = 1.0
    for _ in range(100):
        N = int(rng.integers(1, 51))
        n = int(rng.integers(2, 31))
        S = rng.standard_normal((N, n)) * rng.uniform(0.1, 5.0, (N, 1))
        worst = min(worst, abs_cos(compute_centroid(S), union_centroid(S)))
    report(4, worst >= 1 - 1e-10, f"worst |cos| to oracle over 100 clusters: 1 - {1 - worst:.1e}")


def test_criterion_5_metric_properties(report):
    rng = np.random.default_rng(5)
    worst = dict.fromkeys(["symmetry", "scale", "polarity", "permutation", "sin-arccos"], 0.0)
    in_range = True
    pairs = 1000
    for _ in range(pairs):
        n = int(rng.integers(2, 40))
        u, v = rng.standard_normal((2, n))
        d = distance(u, v)
        in_range &= 0.0 <= d <= 1.0
        a, b = rng.uniform(1e-3, 1e3, 2)
        perm = rng.permutation(n)
        c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
        checks = {
            "symmetry": distance(v, u),
            "scale": distance(a * u, b * v),
            "polarity": distance(-u, v),
            "permutation": distance(u[perm], v[perm]),
            "sin-arccos": np.sin(np.arccos(np.clip(c, -1, 1))),
        }
        for key, value in checks.items():
            worst[key] = max(worst[key], abs(value - d))
        worst["sin-arccos"] = max(worst["sin-arccos"], abs(np.sin(angle(u, v)) - d))
    ok = in_range and all(w <= 1e-12 for w in worst.values())
    detail = ", ".join(f"{k} {w:.1e}" for k, w in worst.items())
    report(5, ok, f"{pairs} pairs, range ok={in_range}, max deviation: {detail}")


def test_criterion_6_extraction_round_trip(report):
    rng = np.random.default_rng(6)
    worst_alpha = worst_resid = 0.0
    for _ in range(200):
        K = int(rng.integers(1, 7))
        F = rng.standard_normal((K, 30))
        alpha = rng.standard_normal(K)
        s = alpha @ F
        got = extract(s, F)
        worst_alpha = max(worst_alpha, np.linalg.norm(got.weights - alpha) / np.linalg.norm(alpha))
        Q = np.linalg.qr(F.T, mode="complete")[0]
        r = Q[:, K:] @ rng.standard_normal(30 - K)
        got = extract(s + r, F)
        worst_resid = max(worst_resid, abs(got.residual_norm[0] - np.linalg.norm(r))
                          / np.linalg.norm(r))
    report(6, worst_alpha <= 1e-8 and worst_resid <= 1e-8,
           f"max relative weight error {worst_alpha:.1e}, residual error {worst_resid:.1e}")


def test_criterion_7_determinism(tmp_path, report):
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [run(["compare", "--seed", "7", "--out", str(d)]) for d in (a, b)]
    files = sorted(p.relative_to(a) for p in a.rglob("*")
                   if p.suffix in (".json", ".svg") and p.name != "manifest.json")
    differ = [str(p) for p in files if (a / p).read_bytes() != (b / p).read_bytes()]
    report(7, codes == [0, 0] and files and not differ,
           f"{len(files)} result JSON/SVG files compared, {len(differ)} differ {differ[:3]}")


def test_criterion_8_ar_statistics(report):
    rng = np.random.default_rng(8)
    r = np.mean([lag1_autocorrelation(generate_prototype(30, 0.9, rng)) for _ in range(1000)])
    report(8, 0.8 <= r <= 0.95, f"mean lag-1 autocorrelation {r:.4f}")


def test_criterion_9_inversion_invariance(report):
    data = generate(SynthSpec(seed=9))
    rng = np.random.default_rng(9)
    flip = rng.permutation(len(data.signals))[: len(data.signals) // 2]
    Y = data.signals.copy()
    Y[flip] *= -1
    cfg = ClusterConfig(k=2, seed=9)
    base, flipped = fit(data.signals, cfg), fit(Y, cfg)
    same_labels = np.array_equal(base.labels, flipped.labels)
    same_centroids = np.array_equal(base.centroids, flipped.centroids)
    report(9, same_labels and same_centroids,
           f"{len(flip)} signals flipped; labels identical={same_labels}, "
           f"centroids identical={same_centroids}")
