import json

import jsonschema
import numpy as np
import pytest

from normkmeans.baselines import pca
from normkmeans.cluster import ClusterConfig, fit
from normkmeans.evaluation import evaluate
from normkmeans.extract import extract
from normkmeans.io import (
    DimensionMismatch,
    ParseError,
    SignalSet,
    dumps_result,
    file_digest,
    load_schema,
    read_manifest,
    read_result,
    read_signals,
    verify_inputs,
    write_manifest,
    write_result,
    write_signals,
)


@pytest.mark.parametrize("name", ["s.csv", "s.nks"])
def test_round_trip_bitwise(tmp_path, rng, name):
    X = rng.standard_normal((10, 30)) * 10.0 ** rng.integers(-300, 300, (10, 30))
    path = tmp_path / name
    write_signals(path, X)
    back = read_signals(path)
    assert back.labels is None
    assert back.signals.tobytes() == X.tobytes()


@pytest.mark.parametrize("name", ["s.csv", "s.nks"])
def test_labels_preserved(tmp_path, rng, name):
    data = SignalSet(rng.standard_normal((6, 4)), [0, 2, 1, 0, 1, 2])
    write_signals(tmp_path / name, data)
    np.testing.assert_array_equal(read_signals(tmp_path / name).labels, data.labels)


def test_ragged_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# normkmeans-signals v1 N=3 n=2 labels=0\n1,2\n3,4,5\n6,7\n")
    with pytest.raises(ParseError, match="row 3") as info:
        read_signals(path)
    assert info.value.row == 3


def test_bad_cell_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# normkmeans-signals v1 N=1 n=3 labels=0\n1,x,3\n")
    with pytest.raises(ParseError) as info:
        read_signals(path)
    assert (info.value.row, info.value.column) == (2, 2)


def test_missing_header_and_count(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n")
    with pytest.raises(ParseError):
        read_signals(path)
    path.write_text("# normkmeans-signals v1 N=3 n=2 labels=0\n1,2\n")
    with pytest.raises(DimensionMismatch):
        read_signals(path)


def test_truncated_binary(tmp_path, rng):
    path = tmp_path / "s.nks"
    write_signals(path, rng.standard_normal((3, 3)))
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(ParseError):
        read_signals(path)


def test_nonfinite_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_signals(tmp_path / "s.csv", np.array([[1.0, np.nan]]))


def _results(rng):
    X = np.array([[1.0, 0.0], [-2.0, 0.1], [0.0, 1.0], [0.1, -3.0]])
    cl = fit(X, ClusterConfig(k=2, seed=0))
    T = np.eye(2)
    return {
        "cluster-result": cl,
        "match-report": evaluate(cl.centroids, T, cl.labels, np.array([1, 1, 2, 2])),
        "pca-result": pca(rng.standard_normal((8, 5)), 3),
        "feature-amplitudes": extract(rng.standard_normal((4, 6)), rng.standard_normal((2, 6))),
    }


def test_results_validate_and_reserialize(tmp_path, rng):
    for kind, obj in _results(rng).items():
        path = tmp_path / f"{kind}.json"
        write_result(path, obj)
        doc = json.loads(path.read_text())
        assert doc["schema"] == kind and doc["schema_version"] == 1
        jsonschema.validate(doc, load_schema(kind))
        back = read_result(path)
        assert dumps_result(back) == path.read_text()


def test_cluster_result_shape(tmp_path, rng):
    res = _results(rng)["cluster-result"]
    doc = json.loads(dumps_result(res))
    assert doc["k"] == 2 and len(doc["labels"]) == 4
    assert np.array(doc["centroids"]).shape == (2, 2)


def test_unknown_schema(tmp_path):
    path = tmp_path / "x.json"
    path.write_text(json.dumps({"schema": "nope", "schema_version": 1}))
    with pytest.raises(ParseError):
        read_result(path)
    with pytest.raises(TypeError):
        dumps_result(object())


def test_manifest_detects_mutation(tmp_path, rng):
    data = tmp_path / "s.csv"
    write_signals(data, rng.standard_normal((5, 3)))
    out = tmp_path / "r.json"
    out.write_text("{}\n")
    m = write_manifest(tmp_path / "manifest.json", command="cluster", config={"k": 2},
                       inputs=[data], termination="moves", elapsed=0.1, outputs=[out])
    jsonschema.validate(m, load_schema("run-manifest"))
    assert m["outputs"] == ["r.json"]
    loaded = read_manifest(tmp_path / "manifest.json")
    assert loaded["inputs"][str(data)] == file_digest(data)
    assert verify_inputs(loaded)
    raw = bytearray(data.read_bytes())
    raw[-2] ^= 1
    data.write_bytes(bytes(raw))
    assert not verify_inputs(loaded)
