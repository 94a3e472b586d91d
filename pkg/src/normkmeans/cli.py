"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 precondition or
numerical failure.  Set ``NORMKMEANS_THREADS`` to cap BLAS worker threads.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import PcaResult, angular_kmeans, euclidean_kmeans, pca
from .cluster import ClusterConfig, ClusterResult, fit
from .evaluation import evaluate, project_to_plane
from .extract import amplitude_image, extract
from .io import (
    DimensionMismatch,
    ParseError,
    SignalSet,
    read_result,
    read_signals,
    write_manifest,
    write_result,
    write_signals,
)
from .plotting import (
    FIGURE_KINDS,
    plot_comparison,
    render_figure,
    save_rgb_png,
)
from .synth import SynthSpec, generate

log = logging.getLogger("normkmeans")

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

METHODS = ("proposed", "angular", "euclidean", "pca")


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return value


def _seed(text):
    value = _nonneg_int(text)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _seed_range(text):
    """``0..19``, ``0-19`` or a comma list ``1,4,7``."""
    for sep in ("..", "-"):
        if sep in text:
            lo, _, hi = text.partition(sep)
            lo, hi = _seed(lo), _seed(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
            return list(range(lo, hi + 1))
    return [_seed(t) for t in text.split(",") if t]


def _channels(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--channels takes three comma-separated indices")
    values = [_nonneg_int(p) for p in parts]
    if len(set(values)) != 3:
        raise argparse.ArgumentTypeError("--channels indices must be distinct")
    return values


def _add_cluster_flags(p):
    p.add_argument("--k", type=_positive_int, required=True, help="number of clusters")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--moves-criterion", type=_nonneg_int, default=0)
    p.add_argument("--difference-criterion", type=_nonneg_float, default=1e-6)
    p.add_argument("--max-iterations", type=_positive_int, default=100)
    p.add_argument("--n-init", type=_positive_int, default=10,
                   help="restarts; the lowest final mean residual wins")


def _add_synth_flags(p):
    d = SynthSpec()
    p.add_argument("--n", type=_positive_int, default=d.n, help="samples per signal")
    p.add_argument("--classes", type=_nonneg_int, default=d.num_classes)
    p.add_argument("--points-per-class", type=_nonneg_int, default=d.points_per_class)
    p.add_argument("--background", type=_nonneg_int, default=d.background_points)
    p.add_argument("--ar-coefficient", type=float, default=d.ar_coefficient)
    p.add_argument("--amplitude-min", type=float, default=d.amplitude_range[0])
    p.add_argument("--amplitude-max", type=float, default=d.amplitude_range[1])
    p.add_argument("--unsigned", action="store_true", help="keep every amplitude positive")
    p.add_argument("--noise-sigma", type=_nonneg_float, default=d.noise_sigma)
    p.add_argument("--min-separation", type=_nonneg_float, default=d.min_prototype_separation)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="normkmeans",
        description="Polarity-agnostic normalized K-Means for learning signal shapes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=_seed, default=SynthSpec().seed)
    p.add_argument("--binary", action="store_true", help="write .nks instead of CSV")
    _add_synth_flags(p)

    for name, helptext in (
        ("cluster", "normalized polarity-agnostic K-Means"),
        ("angular-kmeans", "angular-distance (spherical) K-Means baseline"),
        ("euclidean-kmeans", "Euclidean K-Means baseline"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--in", dest="input", type=Path, required=True)
        p.add_argument("--out", type=Path, required=True)
        _add_cluster_flags(p)

    p = sub.add_parser("pca", help="principal components baseline")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--k", type=_positive_int, required=True, help="number of components")

    p = sub.add_parser("extract", help="feature amplitudes by least squares")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--centroids", type=Path, required=True,
                   help="result JSON or signal file holding one feature per row")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--channels", type=_channels, default=None, help="r,g,b feature indices")
    p.add_argument("--width", type=_positive_int, default=None)
    p.add_argument("--height", type=_positive_int, default=None)

    p = sub.add_parser("evaluate", help="match learned features and labels to ground truth")
    p.add_argument("--result", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True, help="directory written by `synth`")
    p.add_argument("--out", type=Path, required=True, help="match report JSON path")

    p = sub.add_parser("render", help="draw a figure from a result file")
    p.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    p.add_argument("--result", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="SVG path")
    p.add_argument("--in", dest="input", type=Path, default=None,
                   help="signals to project (scatter2d)")
    p.add_argument("--truth", type=Path, default=None,
                   help="synth directory whose prototypes define the plane (scatter2d)")

    p = sub.add_parser("compare", help="synthetic head-to-head of all methods")
    p.add_argument("--out", type=Path, required=True)
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=_seed, default=None)
    seeds.add_argument("--seeds", type=_seed_range, nargs="?", const=list(range(20)),
                       default=None, help="seed range such as 0..19 (the default when bare)")
    _add_synth_flags(p)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--moves-criterion", type=_nonneg_int, default=0)
    p.add_argument("--difference-criterion", type=_nonneg_float, default=1e-6)
    p.add_argument("--max-iterations", type=_positive_int, default=100)
    p.add_argument("--n-init", type=_positive_int, default=10)
    return parser


def _synth_spec(args, seed):
    try:
        return SynthSpec(
            n=args.n,
            num_classes=args.classes,
            points_per_class=args.points_per_class,
            background_points=args.background,
            ar_coefficient=args.ar_coefficient,
            amplitude_range=(args.amplitude_min, args.amplitude_max),
            signed=not args.unsigned,
            noise_sigma=args.noise_sigma,
            min_prototype_separation=args.min_separation,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cluster_config(args, seed=None):
    return ClusterConfig(
        k=args.k,
        moves_criterion=args.moves_criterion,
        difference_criterion=args.difference_criterion,
        max_iterations=args.max_iterations,
        seed=args.seed if seed is None else seed,
        n_init=args.n_init,
    )


def _write_dataset(out, data, binary=False):
    out.mkdir(parents=True, exist_ok=True)
    ext = ".nks" if binary else ".csv"
    signals = out / f"signals{ext}"
    prototypes = out / f"prototypes{ext}"
    write_signals(signals, SignalSet(data.signals, data.true_labels))
    write_signals(prototypes, SignalSet(data.prototypes))
    truth = out / "truth.json"
    truth.write_text(json.dumps({
        "spec": data.spec.to_dict(),
        "amplitudes": [float(a) for a in data.amplitudes],
    }, indent=2) + "\n")
    return [signals, prototypes, truth]


def _load_truth(directory):
    directory = Path(directory)
    for ext in (".csv", ".nks"):
        if (directory / f"signals{ext}").exists():
            return read_signals(directory / f"signals{ext}"), read_signals(directory / f"prototypes{ext}")
    raise FileNotFoundError(f"no signals.csv or signals.nks in {directory}")


def _features_of(result):
    if isinstance(result, ClusterResult):
        return result.centroids
    if isinstance(result, PcaResult):
        return result.components
    raise UsageError("result file holds neither centroids nor components")


def cmd_synth(args):
    spec = _synth_spec(args, args.seed)
    t0 = time.perf_counter()
    data = generate(spec)
    written = _write_dataset(args.out, data, args.binary)
    write_manifest(args.out / "manifest.json", command="synth", config=spec.to_dict(),
                   elapsed=time.perf_counter() - t0, outputs=written)


def _run_kmeans(X, method, config):
    if method == "cluster":
        return fit(X, config)
    runner = angular_kmeans if method == "angular-kmeans" else euclidean_kmeans
    return runner(X, config.k, seed=config.seed, max_iterations=config.max_iterations,
                  moves_criterion=config.moves_criterion,
                  difference_criterion=config.difference_criterion, n_init=config.n_init)


def cmd_kmeans(args):
    config = _cluster_config(args)
    data = read_signals(args.input)
    t0 = time.perf_counter()
    result = _run_kmeans(data.signals, args.command, config)
    elapsed = time.perf_counter() - t0
    args.out.mkdir(parents=True, exist_ok=True)
    outputs = [args.out / "result.json", args.out / "centroids.csv",
               args.out / "centroids.svg", args.out / "residual.svg"]
    write_result(outputs[0], result)
    write_signals(outputs[1], result.centroids)
    render_figure("centroids", outputs[2], vectors=result.centroids, title=result.method)
    render_figure("residual_curve", outputs[3], history=result.residual_history,
                  title=result.method)
    write_manifest(args.out / "manifest.json", command=args.command, config=asdict(config),
                   inputs=[args.input], termination=result.termination, elapsed=elapsed,
                   outputs=outputs)
    log.info("%s: %d iterations, %s", result.method, result.iterations, result.termination)


def cmd_pca(args):
    data = read_signals(args.input)
    t0 = time.perf_counter()
    result = pca(data.signals, args.k)
    elapsed = time.perf_counter() - t0
    args.out.mkdir(parents=True, exist_ok=True)
    outputs = [args.out / "result.json", args.out / "components.csv", args.out / "centroids.svg"]
    write_result(outputs[0], result)
    write_signals(outputs[1], result.components)
    render_figure("centroids", outputs[2], vectors=result.components, title="PCA")
    write_manifest(args.out / "manifest.json", command="pca", config={"num_components": args.k},
                   inputs=[args.input], elapsed=elapsed, outputs=outputs)


def cmd_extract(args):
    if (args.width is None) != (args.height is None):
        raise UsageError("--width and --height go together")
    if args.channels is not None and args.width is None:
        raise UsageError("--channels needs --width and --height")
    data = read_signals(args.input)
    if args.centroids.suffix == ".json":
        bank = _features_of(read_result(args.centroids))
    else:
        bank = read_signals(args.centroids).signals
    t0 = time.perf_counter()
    amps = extract(data.signals, bank)
    args.out.mkdir(parents=True, exist_ok=True)
    outputs = [args.out / "amplitudes.json"]
    write_result(outputs[0], amps)
    if args.width is not None:
        channels = args.channels or [0, 1, 2]
        rgb = amplitude_image(amps.weights, args.width, args.height, channels)
        save_rgb_png(rgb, args.out / "image.png")
        sidecar = args.out / "image.json"
        sidecar.write_text(json.dumps({
            "channels": {"red": channels[0], "green": channels[1], "blue": channels[2]},
            "value": "absolute feature amplitude",
            "scaling": "per-channel maximum",
            "width": args.width,
            "height": args.height,
            "pixel_order": "row-major",
        }, indent=2) + "\n")
        outputs += [args.out / "image.png", sidecar]
    write_manifest(args.out / "manifest.json", command="extract",
                   config={"channels": args.channels, "width": args.width, "height": args.height},
                   inputs=[args.input, args.centroids], elapsed=time.perf_counter() - t0,
                   outputs=outputs)


def cmd_evaluate(args):
    result = read_result(args.result)
    signals, prototypes = _load_truth(args.truth)
    if isinstance(result, ClusterResult):
        if signals.labels is None:
            raise UsageError("truth signals carry no labels")
        if result.labels.shape[0] != len(signals):
            raise DimensionMismatch("result and truth disagree on the number of signals")
        report = evaluate(result.centroids, prototypes.signals, result.labels, signals.labels,
                          method=result.method)
    else:
        report = evaluate(_features_of(result), prototypes.signals, method="pca")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_result(args.out, report)


def cmd_render(args):
    result = read_result(args.result)
    features = _features_of(result)
    if args.kind == "centroids":
        render_figure("centroids", args.out, vectors=features)
    elif args.kind == "residual_curve":
        if not isinstance(result, ClusterResult):
            raise UsageError("residual_curve needs a clustering result")
        render_figure("residual_curve", args.out, history=result.residual_history)
    else:
        if args.input is None:
            raise UsageError("scatter2d needs --in")
        X = read_signals(args.input).signals
        if isinstance(result, PcaResult):
            if features.shape[0] < 2:
                raise UsageError("scatter2d needs at least two principal components")
            coords, labels = result.transform(X)[:, :2], np.zeros(X.shape[0], dtype=int)
            render_figure("scatter2d", args.out, coords=coords, labels=labels,
                          axis_names=("PC1", "PC2"), background=None)
            return
        if args.truth is not None:
            basis = _load_truth(args.truth)[1].signals
        else:
            basis = features
        if basis.shape[0] < 2:
            raise UsageError("scatter2d needs two basis vectors")
        coords = project_to_plane(X, basis[0], basis[1])
        arrows = project_to_plane(features, basis[0], basis[1])
        render_figure("scatter2d", args.out, coords=coords, labels=result.labels + 1,
                      arrows=arrows, background=None)


def _compare_one(args, seed, out):
    """Run every method on one seeded dataset; returns summary rows."""
    spec = _synth_spec(args, seed)
    config = _cluster_config(args, seed)
    data = generate(spec)
    X = data.signals
    written = _write_dataset(out / "dataset", data)

    timings = {}
    results = {}
    t0 = time.perf_counter()
    results["proposed"] = fit(X, config)
    timings["proposed"] = time.perf_counter() - t0
    for name, runner in (("angular", angular_kmeans), ("euclidean", euclidean_kmeans)):
        t0 = time.perf_counter()
        results[name] = runner(X, config.k, seed=seed, max_iterations=config.max_iterations,
                               moves_criterion=config.moves_criterion,
                               difference_criterion=config.difference_criterion,
                               n_init=config.n_init)
        timings[name] = time.perf_counter() - t0
    t0 = time.perf_counter()
    results["pca"] = pca(X, min(config.k, *X.shape))
    timings["pca"] = time.perf_counter() - t0

    (out / "results").mkdir(parents=True, exist_ok=True)
    (out / "match").mkdir(parents=True, exist_ok=True)
    (out / "figures").mkdir(parents=True, exist_ok=True)
    reports = {}
    rows = []
    for name in METHODS:
        res = results[name]
        write_result(out / "results" / f"{name}.json", res)
        if isinstance(res, ClusterResult):
            rep = evaluate(res.centroids, data.prototypes, res.labels, data.true_labels,
                           method=res.method)
        else:
            rep = evaluate(res.components, data.prototypes, method="pca")
        reports[name] = rep
        write_result(out / "match" / f"{name}.json", rep)
        rows.append({
            "seed": seed,
            "method": name,
            "mean_abs_cos": f"{rep.mean_abs_cos:.6f}",
            "membership_accuracy": "" if rep.membership_accuracy is None
            else f"{rep.membership_accuracy:.6f}",
            "iterations": res.iterations if isinstance(res, ClusterResult) else "",
            "termination": res.termination if isinstance(res, ClusterResult) else "",
        })
        written += [out / "results" / f"{name}.json", out / "match" / f"{name}.json"]

    written += _compare_figures(out / "figures", data, results)
    write_manifest(
        out / "manifest.json",
        command="compare",
        config={"synth": spec.to_dict(), "cluster": asdict(config)},
        termination={m: results[m].termination for m in METHODS if m != "pca"},
        elapsed=timings,
        outputs=written,
    )
    return rows


def _compare_figures(figdir, data, results):
    X, P = data.signals, data.prototypes
    truth_labels = data.true_labels
    pcs = results["pca"]
    if pcs.components.shape[0] >= 2:
        pc_coords = pcs.transform(X)[:, :2]
    else:
        pc_coords = np.column_stack([pcs.transform(X)[:, 0], np.zeros(X.shape[0])])

    # data points live in the plane of the first two prototypes when there is one
    if P.shape[0] >= 2:
        coords = project_to_plane(X, P[0], P[1])

        def arrows(F):
            return project_to_plane(F, P[0], P[1])
    else:
        coords = pc_coords

        def arrows(F):
            return None

    rows = [{"name": "ground truth", "vectors": P, "coords": coords, "labels": truth_labels,
             "arrows": arrows(P), "background": 0}]
    rows.append({"name": "PCA", "vectors": pcs.components, "coords": pc_coords,
                 "labels": truth_labels, "axis_names": ("PC1", "PC2"), "background": 0})
    for key, title in (("angular", "angular-distance K-Means"),
                       ("euclidean", "Euclidean K-Means"),
                       ("proposed", "normalized K-Means")):
        res = results[key]
        rows.append({"name": title, "vectors": res.centroids, "coords": coords,
                     "labels": res.labels + 1, "arrows": arrows(res.centroids),
                     "background": None})

    slug = {"ground truth": "truth", "PCA": "pca", "angular-distance K-Means": "angular",
            "Euclidean K-Means": "euclidean", "normalized K-Means": "proposed"}
    for row in rows:
        name = slug[row["name"]]
        render_figure("centroids", figdir / f"{name}_features.svg", vectors=row["vectors"],
                      title=row["name"])
        render_figure("scatter2d", figdir / f"{name}_points.svg", coords=row["coords"],
                      labels=row["labels"], arrows=row.get("arrows"), title=row["name"],
                      axis_names=row.get("axis_names", ("p1", "p2")),
                      background=row["background"])
    render_figure("residual_curve", figdir / "proposed_residual.svg",
                  history=results["proposed"].residual_history, title="normalized K-Means")
    # four-row grid: truth, PCA, angular, proposed
    grid = [r for r in rows if r["name"] != "Euclidean K-Means"]
    plot_comparison(grid, figdir / "comparison.svg")
    return sorted(figdir.glob("*.svg"))


def _write_summary(path, rows):
    fields = ["seed", "method", "mean_abs_cos", "membership_accuracy", "iterations",
              "termination"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def cmd_compare(args):
    if args.seeds is not None:
        rows = []
        for seed in args.seeds:
            rows += _compare_one(args, seed, args.out / f"seed-{seed:03d}")
        _write_summary(args.out / "summary.csv", rows)
        _print_sweep(rows)
    else:
        seed = SynthSpec().seed if args.seed is None else args.seed
        rows = _compare_one(args, seed, args.out)
        _write_summary(args.out / "summary.csv", rows)
        for r in rows:
            print(f"{r['method']:<10} mean|cos|={r['mean_abs_cos']}  "
                  f"accuracy={r['membership_accuracy'] or '-'}")


def _print_sweep(rows):
    for method in METHODS:
        mine = [r for r in rows if r["method"] == method]
        cos = np.array([float(r["mean_abs_cos"]) for r in mine])
        acc = [float(r["membership_accuracy"]) for r in mine if r["membership_accuracy"]]
        line = f"{method:<10} mean|cos| median={np.median(cos):.4f} min={cos.min():.4f}"
        if acc:
            line += f"  accuracy median={np.median(acc):.4f} min={min(acc):.4f}"
        print(line)


COMMANDS = {
    "synth": cmd_synth,
    "cluster": cmd_kmeans,
    "angular-kmeans": cmd_kmeans,
    "euclidean-kmeans": cmd_kmeans,
    "pca": cmd_pca,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "render": cmd_render,
    "compare": cmd_compare,
}


def _thread_limit():
    value = os.environ.get("NORMKMEANS_THREADS")
    if not value:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    limiter = _thread_limit()
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"normkmeans: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, DimensionMismatch) as exc:
        print(f"normkmeans: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"normkmeans: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if limiter is not None:
            limiter.restore_original_limits()
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
