import json
import os

import numpy as np
import pytest

from hdmvl import data as dt
from hdmvl.dirichlet import DimensionError

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def small_spec(**kw):
    base = dict(num_classes=3, dims=(4, 2), separation=(2.0, 1.0), sigma=(0.5, 0.5), samples_per_class=100, seed=3)
    base.update(kw)
    return dt.SyntheticSpec(**base)


def test_generate_balanced_and_deterministic():
    a = dt.generate_synthetic(small_spec())
    b = dt.generate_synthetic(small_spec())
    assert a.n == 300 and a.num_views == 2 and a.view_dims == [4, 2]
    np.testing.assert_array_equal(np.bincount(a.labels), [100, 100, 100])
    for x, y in zip(a.views, b.views):
        np.testing.assert_array_equal(x, y)


def test_zero_noise_rows_identical_within_class():
    ds = dt.generate_synthetic(small_spec(sigma=(0.0, 0.0)))
    for v in ds.views:
        for c in range(3):
            rows = v[ds.labels == c]
            assert np.all(rows == rows[0])
        norms = {round(float(np.linalg.norm(v[ds.labels == c][0])), 12) for c in range(3)}
        assert len(norms) == 1  # centers on a common sphere


def test_complementary_fixture_geometry():
    ds = dt.generate_synthetic(dt.SyntheticSpec(**{**dt.complementary_spec().__dict__, "sigma": (0.0, 0.0)}))
    v0, v1 = ds.views
    c = [ds.labels == k for k in range(3)]
    assert not np.allclose(v0[c[0]][0], v0[c[1]][0]) and np.array_equal(v0[c[1]][0], v0[c[2]][0])
    assert np.array_equal(v1[c[0]][0], v1[c[1]][0]) and not np.allclose(v1[c[1]][0], v1[c[2]][0])


def test_inject_noise_zero_is_identity():
    ds = dt.generate_synthetic(small_spec())
    out = dt.inject_noise(ds, 0, 0.0, 1)
    for x, y in zip(ds.views, out.views):
        np.testing.assert_array_equal(x, y)


def test_inject_noise_variance_and_isolation():
    ds = dt.generate_synthetic(small_spec(dims=(40, 3), samples_per_class=100))
    before = [v.copy() for v in ds.views]
    out = dt.inject_noise(ds, 0, 0.05, 9)
    diff = out.views[0] - ds.views[0]
    assert diff.size >= 10_000
    assert abs(diff.var() - 0.0025) <= 0.1 * 0.0025
    np.testing.assert_array_equal(out.views[1], ds.views[1])
    for b, v in zip(before, ds.views):
        np.testing.assert_array_equal(b, v)  # original untouched
    np.testing.assert_array_equal(out.sample_ids, ds.sample_ids)
    with pytest.raises(DimensionError):
        dt.inject_noise(ds, 2, 0.1, 0)


def test_inject_noise_all_views():
    ds = dt.generate_synthetic(small_spec())
    out = dt.inject_noise(ds, None, 0.1, 0)
    assert all(not np.array_equal(a, b) for a, b in zip(ds.views, out.views))


def test_split_stratified_disjoint_exhaustive():
    ds = dt.generate_synthetic(small_spec())
    tr, te = dt.split(ds, 0.5, 4)
    np.testing.assert_array_equal(np.bincount(tr.labels), [50, 50, 50])
    np.testing.assert_array_equal(np.bincount(te.labels), [50, 50, 50])
    ids = np.concatenate([tr.sample_ids, te.sample_ids])
    assert len(set(ids)) == ds.n and set(ids) == set(range(ds.n))
    tr2, te2 = dt.split(ds, 0.5, 4)
    np.testing.assert_array_equal(te.sample_ids, te2.sample_ids)
    # rows stay aligned with their ids
    for v_full, v_part in zip(ds.views, te.views):
        np.testing.assert_array_equal(v_full[te.sample_ids], v_part)


def test_split_errors():
    ds = dt.MultiViewDataset([np.zeros((3, 1))], [0, 0, 1], 2)
    with pytest.raises(dt.StratificationError):
        dt.split(ds, 0.5, 0)
    with pytest.raises(ValueError):
        dt.split(ds, 1.0, 0)


def test_load_checked_in_manifest():
    ds = dt.load_manifest(os.path.join(FIXTURES, "toy2view", "manifest.json"))
    assert ds.n == 6 and ds.num_views == 2 and ds.view_dims == [3, 2]
    assert ds.num_classes == 3
    np.testing.assert_array_equal(ds.views[1][:, 0], [0.5, 0.7, 0.9, 1.1, 1.3, 1.5])  # CRLF file


def write(tmp_path, name, text):
    (tmp_path / name).write_text(text, encoding="utf-8")


def manifest(tmp_path, views, labels="y.csv", extra=None):
    obj = {"views": views, "labels": labels, **(extra or {})}
    write(tmp_path, "m.json", json.dumps(obj))
    return tmp_path / "m.json"


def test_row_count_mismatch_names_both_files(tmp_path):
    write(tmp_path, "a.csv", "x\n" + "1\n" * 5)
    write(tmp_path, "b.csv", "x\n" + "1\n" * 6)
    write(tmp_path, "y.csv", "0\n" * 6)
    with pytest.raises(dt.RowCountMismatchError, match=r"a\.csv.*b\.csv"):
        dt.load_manifest(manifest(tmp_path, ["a.csv", "b.csv"]))


def test_label_range_error(tmp_path):
    write(tmp_path, "a.csv", "x\n1\n2\n3\n")
    write(tmp_path, "y.csv", "0\n1\n7\n")
    with pytest.raises(dt.LabelRangeError):
        dt.load_manifest(manifest(tmp_path, ["a.csv"], extra={"num_classes": 3}))


def test_missing_ragged_nonnumeric(tmp_path):
    write(tmp_path, "y.csv", "0\n1\n")
    with pytest.raises(dt.MissingFileError):
        dt.load_manifest(manifest(tmp_path, ["nope.csv"]))
    write(tmp_path, "r.csv", "x,y\n1,2\n3\n")
    with pytest.raises(dt.RaggedRowError):
        dt.load_manifest(manifest(tmp_path, ["r.csv"]))
    write(tmp_path, "n.csv", "x,y\n1,2\n3,abc\n")
    with pytest.raises(dt.NonNumericCellError, match="abc"):
        dt.load_manifest(manifest(tmp_path, ["n.csv"]))
    with pytest.raises(dt.MissingFileError):
        dt.load_manifest(tmp_path / "absent.json")


def test_save_and_reload(tmp_path):
    ds = dt.generate_synthetic(small_spec(samples_per_class=5))
    path = dt.save_manifest(ds, tmp_path / "d")
    back = dt.load_manifest(path)
    np.testing.assert_array_equal(back.labels, ds.labels)
    for a, b in zip(ds.views, back.views):
        np.testing.assert_array_equal(a, b)


def test_dataset_validation():
    with pytest.raises(DimensionError):
        dt.MultiViewDataset([np.zeros((3, 2)), np.zeros((4, 2))], [0, 1, 0], 2)
    with pytest.raises(dt.LabelRangeError):
        dt.MultiViewDataset([np.zeros((2, 2))], [0, 2], 2)
