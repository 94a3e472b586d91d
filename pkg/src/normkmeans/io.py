"""Signal files, JSON result files and run manifests.

Signal files come in two flavours, chosen by extension:

* text (any extension other than ``.nks``): a header line
  ``# normkmeans-signals v1 N=<N> n=<n> labels=<0|1>`` followed by N
  comma-separated rows of n values written with 17 significant digits,
  plus a trailing integer label when ``labels=1``;
* binary (``.nks``): magic ``NKS1``, little-endian ``uint32 N``,
  ``uint32 n``, ``uint8 has_labels``, then N*n little-endian float64 values
  in row-major order and, if present, N little-endian int64 labels.

Both round-trip finite doubles bit for bit.  Result files are JSON with a
``schema`` name and ``schema_version``; the JSON Schema documents live in
``normkmeans/schemas``.
"""

import hashlib
import json
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .baselines import PcaResult
from .cluster import ClusterResult
from .evaluation import MatchReport
from .extract import FeatureAmplitudes

__all__ = [
    "DimensionMismatch",
    "ParseError",
    "dumps_result",
    "SignalSet",
    "file_digest",
    "load_schema",
    "read_manifest",
    "read_result",
    "read_signals",
    "verify_inputs",
    "write_manifest",
    "write_result",
    "write_signals",
]

SIGNAL_FORMAT_VERSION = 1
SCHEMA_VERSION = 1
_MAGIC = b"NKS1"
_HEADER = struct.Struct("<IIB")
_TEXT_PREFIX = "# normkmeans-signals"


class ParseError(ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class DimensionMismatch(ValueError):
    pass


@dataclass
class SignalSet:
    signals: np.ndarray  # (N, n)
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.signals = np.atleast_2d(np.asarray(self.signals, dtype=float))
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.signals.shape[0],):
                raise DimensionMismatch("one label per signal is required")

    def __len__(self):
        return self.signals.shape[0]


def _is_binary(path):
    return Path(path).suffix.lower() == ".nks"


def write_signals(path, data):
    """Write a :class:`SignalSet` (or a bare (N, n) array)."""
    if not isinstance(data, SignalSet):
        data = SignalSet(data)
    X = data.signals
    if not np.all(np.isfinite(X)):
        raise ValueError("signals contain non-finite values")
    N, n = X.shape
    has_labels = data.labels is not None
    path = Path(path)
    if _is_binary(path):
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(_HEADER.pack(N, n, int(has_labels)))
            fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())
            if has_labels:
                fh.write(np.ascontiguousarray(data.labels, dtype="<i8").tobytes())
        return
    lines = [f"{_TEXT_PREFIX} v{SIGNAL_FORMAT_VERSION} N={N} n={n} labels={int(has_labels)}"]
    for j in range(N):
        row = ",".join("%.17g" % v for v in X[j])
        if has_labels:
            row += f",{int(data.labels[j])}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n")


def _read_binary(path):
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ParseError("not a normkmeans binary signal file")
    try:
        N, n, has_labels = _HEADER.unpack_from(raw, 4)
    except struct.error:
        raise ParseError("truncated header") from None
    off = 4 + _HEADER.size
    expect = off + 8 * N * n + (8 * N if has_labels else 0)
    if len(raw) != expect:
        raise ParseError(f"expected {expect} bytes, found {len(raw)}")
    X = np.frombuffer(raw, dtype="<f8", count=N * n, offset=off).astype(float).reshape(N, n)
    labels = None
    if has_labels:
        labels = np.frombuffer(raw, dtype="<i8", count=N, offset=off + 8 * N * n).astype(np.int64)
    return SignalSet(X, labels)


def _parse_header(line):
    parts = line.split()
    if len(parts) < 2 or " ".join(parts[:2]) != _TEXT_PREFIX:
        raise ParseError("missing normkmeans-signals header", row=1)
    fields = {}
    for tok in parts[3:]:
        key, _, value = tok.partition("=")
        fields[key] = value
    if parts[2:3] != [f"v{SIGNAL_FORMAT_VERSION}"]:
        raise ParseError(f"unsupported format version {parts[2:3]}", row=1)
    try:
        return int(fields["N"]), int(fields["n"]), fields.get("labels", "0") == "1"
    except (KeyError, ValueError):
        raise ParseError("header must carry integer N= and n=", row=1) from None


def read_signals(path):
    """Read a signal file written by :func:`write_signals`."""
    if _is_binary(path):
        return _read_binary(path)
    with open(path) as fh:
        header = fh.readline()
        N, n, has_labels = _parse_header(header)
        width = n + int(has_labels)
        X = np.empty((N, n))
        labels = np.empty(N, dtype=np.int64) if has_labels else None
        count = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != width:
                raise ParseError(f"expected {width} values, found {len(cells)}", row=lineno)
            if count >= N:
                raise DimensionMismatch(f"file holds more than the declared N={N} rows")
            for col, cell in enumerate(cells[:n], start=1):
                try:
                    X[count, col - 1] = float(cell)
                except ValueError:
                    raise ParseError(f"cannot parse {cell!r} as a number", lineno, col) from None
                if not np.isfinite(X[count, col - 1]):
                    raise ParseError("non-finite value", lineno, col)
            if has_labels:
                try:
                    labels[count] = int(cells[-1])
                except ValueError:
                    raise ParseError(f"cannot parse label {cells[-1]!r}", lineno, width) from None
            count += 1
    if count != N:
        raise DimensionMismatch(f"header declares N={N} rows, file holds {count}")
    return SignalSet(X, labels)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_schema(name):
    """JSON Schema document for result kind ``name`` (e.g. ``"cluster-result"``)."""
    text = resources.files("normkmeans").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _ints(a):
    return [int(v) for v in np.asarray(a).ravel()]


def _rows(a):
    return [[float(v) for v in row] for row in np.atleast_2d(np.asarray(a, dtype=float))]


def _to_document(obj):
    if isinstance(obj, ClusterResult):
        return "cluster-result", {
            "method": obj.method,
            "k": int(obj.k),
            "n": int(obj.centroids.shape[1]),
            "termination": obj.termination,
            "iterations": obj.iterations,
            "restart": int(obj.restart),
            "labels": _ints(obj.labels),
            "centroids": _rows(obj.centroids),
            "residual_history": _floats(obj.residual_history),
            "moves_history": _ints(obj.moves_history),
        }
    if isinstance(obj, MatchReport):
        return "match-report", {
            "method": obj.method,
            "permutation": _ints(obj.permutation),
            "per_pair_abs_cos": _floats(obj.per_pair_abs_cos),
            "mean_abs_cos": float(obj.mean_abs_cos),
            "membership_accuracy": None if obj.membership_accuracy is None
            else float(obj.membership_accuracy),
            "membership_permutation": None if obj.membership_permutation is None
            else _ints(obj.membership_permutation),
            "confusion": None if obj.confusion is None
            else [_ints(r) for r in np.atleast_2d(obj.confusion)],
        }
    if isinstance(obj, PcaResult):
        return "pca-result", {
            "components": _rows(obj.components),
            "singular_values": _floats(obj.singular_values),
            "mean": _floats(obj.mean),
        }
    if isinstance(obj, FeatureAmplitudes):
        return "feature-amplitudes", {
            "weights": _rows(obj.weights),
            "residual_norm": _floats(obj.residual_norm),
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _from_document(doc):
    kind = doc.get("schema")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {doc.get('schema_version')!r}")
    if kind == "cluster-result":
        return ClusterResult(
            labels=np.array(doc["labels"], dtype=np.int64),
            centroids=np.array(doc["centroids"], dtype=float),
            residual_history=list(doc["residual_history"]),
            moves_history=list(doc["moves_history"]),
            termination=doc["termination"],
            method=doc["method"],
            restart=doc["restart"],
        )
    if kind == "match-report":
        def opt(key, dtype):
            return None if doc[key] is None else np.array(doc[key], dtype=dtype)
        return MatchReport(
            permutation=np.array(doc["permutation"], dtype=np.int64),
            per_pair_abs_cos=np.array(doc["per_pair_abs_cos"], dtype=float),
            mean_abs_cos=doc["mean_abs_cos"],
            membership_accuracy=doc["membership_accuracy"],
            membership_permutation=opt("membership_permutation", np.int64),
            confusion=opt("confusion", np.int64),
            method=doc["method"],
        )
    if kind == "pca-result":
        return PcaResult(
            components=np.array(doc["components"], dtype=float),
            singular_values=np.array(doc["singular_values"], dtype=float),
            mean=np.array(doc["mean"], dtype=float),
        )
    if kind == "feature-amplitudes":
        return FeatureAmplitudes(
            weights=np.array(doc["weights"], dtype=float),
            residual_norm=np.array(doc["residual_norm"], dtype=float),
        )
    raise ParseError(f"unknown result schema {kind!r}")


def dumps_result(obj):
    kind, body = _to_document(obj)
    doc = {"schema": kind, "schema_version": SCHEMA_VERSION, **body}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_result(path, obj):
    """Serialize a result object to deterministic JSON."""
    Path(path).write_text(dumps_result(obj))


def read_result(path):
    with open(path) as fh:
        return _from_document(json.load(fh))


def write_manifest(path, *, command, config, inputs=(), termination=None, elapsed=None,
                   outputs=()):
    """Record what a run did: config echo, library version, input digests, timing.

    Output paths are stored relative to the manifest's directory.
    """
    root = Path(path).resolve().parent

    def rel(p):
        p = Path(p).resolve()
        return str(p.relative_to(root)) if p.is_relative_to(root) else str(p)

    manifest = {
        "schema": "run-manifest",
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "library_version": __version__,
        "config": config,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": sorted(rel(p) for p in outputs),
        "termination": termination,
        "timing": {"elapsed_seconds": elapsed},
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)


def verify_inputs(manifest):
    """True when every recorded input file still has its recorded digest."""
    return all(Path(p).exists() and file_digest(p) == d for p, d in manifest["inputs"].items())
