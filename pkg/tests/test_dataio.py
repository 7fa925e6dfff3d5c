import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import csv_counts
from pcax import dataio
from pcax.dataio import DatasetManifest, load_csv, verify_manifest
from pcax.errors import DataError
from pcax.stats import DataMatrix

from conftest import DATA_DIR


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_non_numeric_column_dropped(tmp_path):
    p = write(tmp_path, "a,name,b\n1,x,2\n3,y,4\n5,z,7\n")
    data, labels, report = load_csv(p)
    assert data.feature_names == ("a", "b") and labels is None
    assert report.dropped_columns == (("name", "non-numeric"),)
    np.testing.assert_array_equal(data.values, [[1, 3, 5], [2, 4, 7]])


def test_missing_cell_policies(tmp_path):
    p = write(tmp_path, "a,b,c\n1,2,3\n4,NA,6\n7,8,9\n1,1,?\n")
    _, _, by_row = load_csv(p)
    assert by_row.n_objects == 2 and by_row.dropped_rows == 2
    data, _, by_col = load_csv(p, missing_policy="drop_column")
    assert data.feature_names == ("a",) and by_col.n_objects == 4
    assert by_col.dropped("missing values") == ["b", "c"]
    with pytest.raises(ValueError):
        load_csv(p, missing_policy="impute")


def test_missing_tokens_and_infinity(tmp_path):
    p = write(tmp_path, "a,b\n1,2\n,3\nnan,4\ninf,5\n6,7\n8, NaN \n")
    data, _, report = load_csv(p)
    assert data.values.tolist() == [[1.0, 6.0], [2.0, 7.0]]
    assert report.dropped_rows == 4


def test_single_missing_cell_reduces_q_by_one(tmp_path):
    p = write(tmp_path, "a,b\n1,2\n3,\n5,6\n7,9\n")
    assert load_csv(p).report.n_objects == 3


def test_quoted_fields(tmp_path):
    p = write(tmp_path, 'a,"b, quoted",label\n1,"2",x\n3,4,"y, z"\n')
    data, labels, _ = load_csv(p, class_column="label")
    assert data.feature_names == ("a", "b, quoted")
    assert labels == ("x", "y, z")


def test_class_column_and_unlabeled_rows(tmp_path):
    p = write(tmp_path, "a,b,cls\n1,2,u\n2,3,v\n3,5,\n4,4,u\n")
    data, labels, report = load_csv(p, class_column="cls")
    assert labels == ("u", "v", "u") and report.n_classes == 2
    assert data.n_features == 2 and report.dropped_rows == 1


def test_constant_columns_optional(tmp_path):
    p = write(tmp_path, "a,k,b\n1,5,2\n2,5,1\n3,5,7\n")
    assert load_csv(p).data.n_features == 3
    data, _, report = load_csv(p, drop_constant=True)
    assert data.feature_names == ("a", "b") and report.dropped("zero variance") == ["k"]


def test_errors(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "absent.csv")
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "", "empty.csv"))
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,b\n1,2,3\n", "ragged.csv"))
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,a\n1,2\n3,4\n", "dup.csv"))
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,b\nx,y\nz,w\n", "text.csv"))
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,b\n1,2\n", "short.csv"))
    m = DatasetManifest("t", "t.csv", 2, 2, class_column="label")
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,b\n1,2\n3,4\n"), m)
    binary = tmp_path / "bin.csv"
    binary.write_bytes(b"a,b\n\xff\xfe,1\n")
    with pytest.raises(DataError):
        load_csv(binary)


def test_iris_counts():
    data, labels, report = load_csv(DATA_DIR / "iris.csv", class_column="species")
    assert (data.n_features, data.n_objects, report.n_classes) == (4, 150, 3)
    assert (report.n_objects, report.n_features) == (data.n_objects, data.n_features)


def test_verify_manifest():
    registry = {m.name: m for m in dataio.load_registry(DATA_DIR / "manifest.json")}
    wine, glass = registry["wine"], registry["glass"]
    assert (wine.expected_samples, wine.expected_measurements) == (178, 13)
    assert (glass.expected_samples, glass.expected_measurements) == (214, 9)
    _, _, report = load_csv(DATA_DIR / "wine.csv", wine)
    assert verify_manifest(report, wine) == []
    _, _, report = load_csv(DATA_DIR / "glass.csv", glass)
    assert verify_manifest(report, glass) == ["glass: classes 6, expected 7"]


def test_verify_manifest_synthetic(tmp_path):
    p = write(tmp_path, "a,b,c\n1,2,x\n2,1,y\n")
    m = DatasetManifest("s", str(p), 2, 2, class_column="c", expected_classes=2)
    assert verify_manifest(load_csv(p, m).report, m) == []
    off = DatasetManifest("s", str(p), 3, 1, class_column="c", expected_classes=3)
    assert len(verify_manifest(load_csv(p, off).report, off)) == 3
    unlabeled = DatasetManifest("s", str(p), 2, 2, expected_classes=2)
    _, _, report = load_csv(p, class_column=None)
    assert "no class labels" in verify_manifest(report, unlabeled)[0]


@pytest.mark.parametrize("name", ["wine", "glass", "diabetes", "ionosphere", "milk", "machine",
                                  "forest", "slump", "segment-challenge"])
def test_bundled_counts_match_pandas(name):
    m = {m.name: m for m in dataio.load_registry(DATA_DIR / "manifest.json")}[name]
    _, _, report = load_csv(DATA_DIR / m.source, m)
    assert (report.n_objects, report.n_features, report.n_classes) == csv_counts(
        DATA_DIR / m.source, m.class_column, m.exclude_columns)


def test_manifest_validation_and_registry(tmp_path):
    with pytest.raises(DataError):
        DatasetManifest("x", "x.csv", 0, 3)
    with pytest.raises(DataError):
        DatasetManifest("x", "x.csv", 3, 3, expected_classes=0)
    with pytest.raises(DataError):
        DatasetManifest.from_dict({"name": "x", "source": "x.csv", "expected_samples": 1,
                                   "expected_measurements": 1, "colour": "red"})
    ms = [DatasetManifest("a", "a.csv", 10, 2, "cls", 2, ("id",)), DatasetManifest("b", "b.csv", 5, 1)]
    path = tmp_path / "reg.json"
    dataio.save_registry(path, ms)
    assert dataio.load_registry(path) == ms
    path.write_text(json.dumps([ms[1].to_dict(), ms[1].to_dict()]))
    with pytest.raises(DataError):
        dataio.load_registry(path)
    path.write_text("{}")
    with pytest.raises(DataError):
        dataio.load_registry(path)


def test_resolve_source_order(tmp_path, monkeypatch):
    root, env, reg = (tmp_path / d for d in ("root", "env", "reg"))
    for d in (root, env, reg):
        d.mkdir()
    monkeypatch.delenv("PCAX_DATA_DIR", raising=False)
    m = DatasetManifest("d", "d.csv", 2, 1)
    assert dataio.resolve_source(m, root, reg) is None
    (reg / "d.csv").write_text("a\n1\n2\n")
    assert dataio.resolve_source(m, root, reg) == reg / "d.csv"
    (env / "d.csv").write_text("a\n1\n2\n")
    monkeypatch.setenv("PCAX_DATA_DIR", str(env))
    assert dataio.resolve_source(m, root, reg) == env / "d.csv"
    (root / "d.csv").write_text("a\n1\n2\n")
    assert dataio.resolve_source(m, root, reg) == root / "d.csv"
    absolute = DatasetManifest("d", str(root / "d.csv"), 2, 1)
    assert dataio.resolve_source(absolute) == root / "d.csv"


def test_loading_is_deterministic():
    a = load_csv(DATA_DIR / "forest.csv")
    b = load_csv(DATA_DIR / "forest.csv")
    np.testing.assert_array_equal(a.data.values, b.data.values)
    assert a.report == b.report


finite = st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 4), st.integers(2, 12)), elements=finite),
       st.booleans())
def test_write_load_round_trip(tmp_path_factory, values, with_labels):
    data = DataMatrix.from_rows(values, [f"f {i}," for i in range(values.shape[0])])
    labels = [f"c{j % 3}" for j in range(data.n_objects)] if with_labels else None
    path = tmp_path_factory.mktemp("rt") / "x.csv"
    dataio.write_csv(path, data, labels)
    back, back_labels, _ = load_csv(path, class_column="class" if with_labels else None)
    assert back.feature_names == data.feature_names
    np.testing.assert_array_equal(back.values, data.values)
    assert back_labels == (tuple(labels) if labels else None)


def test_write_csv_errors(tmp_path):
    data = DataMatrix.from_rows([[1.0, 2.0]], ["class"])
    with pytest.raises(DataError):
        dataio.write_csv(tmp_path / "x.csv", data, ["a", "b"])
    with pytest.raises(DataError):
        dataio.write_csv(tmp_path / "x.csv", DataMatrix.from_rows([[1.0, 2.0]]), ["a"])
