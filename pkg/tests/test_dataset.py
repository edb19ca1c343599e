import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recbench.dataset import (Dataset, DatasetError, Interaction, load_attributes, load_clusters,
                              load_dataset, write_interactions)
from recbench.splitting import SplitError, SplitSpec, temporal_split

from instances import random_dataset


def _write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return str(path)


def test_dedup_keeps_latest_timestamp(tmp_path):
    p = _write(tmp_path / "d.tsv", ["u1\ti1\t5\t10", "u1\ti1\t4\t20", "u2\ti2\t3\t5"])
    ds = load_dataset(p)
    assert ds.n_interactions == 2
    by_pair = {(it.user, it.item): it for it in ds.interactions}
    assert by_pair[("u1", "i1")].rating == 4 and by_pair[("u1", "i1")].timestamp == 20


def test_dedup_without_timestamps_keeps_last():
    ds = Dataset.from_interactions([("u", "i", 1.0), ("u", "i", 3.0)])
    assert ds.ratings.tolist() == [3.0]


def test_missing_timestamp_column_blocks_temporal_split(tmp_path):
    ds = load_dataset(_write(tmp_path / "d.tsv", ["u1\ti1\t5", "u1\ti2\t3", "u2\ti1\t1"]))
    assert not ds.has_timestamps
    assert all(it.timestamp is None for it in ds.interactions)
    with pytest.raises(SplitError, match="timestamp"):
        temporal_split(ds, SplitSpec("temporal_hold_out", test_ratio=0.2))


def test_crlf_and_blank_lines(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_bytes(b"u1\ti1\t5\t1\r\n\r\nu2\ti1\t2\t3\r\n")
    assert load_dataset(str(p)).n_interactions == 2


@pytest.mark.parametrize("line,msg", [
    ("u1\ti1", "expected 3 or 4"),
    ("u1\ti1\tfive", "unparsable rating"),
    ("u1\ti1\t5\tnoon", "unparsable timestamp"),
    ("u1\ti1\tnan", "finite"),
])
def test_format_errors_are_line_numbered(tmp_path, line, msg):
    p = _write(tmp_path / "d.tsv", ["u0\ti0\t1\t1", line])
    with pytest.raises(DatasetError, match=rf":2: .*{msg}"):
        load_dataset(p)


def test_empty_and_missing_files(tmp_path):
    with pytest.raises(DatasetError, match="empty"):
        load_dataset(_write(tmp_path / "e.tsv", []))
    with pytest.raises(DatasetError, match="not found"):
        load_dataset(str(tmp_path / "nope.tsv"))


def test_attribute_drop_rule(tmp_path):
    ds = Dataset.from_interactions([("u1", "i1", 1), ("u1", "i3", 1), ("u2", "i2", 1),
                                    ("u3", "i3", 1)])
    out = load_attributes(_write(tmp_path / "a.tsv", ["i1\tg1", "i2\tg2\tg3"]), ds)
    assert out.item_ids == ("i1", "i2")
    assert out.user_ids == ("u1", "u2")
    assert out.n_interactions == 2
    assert out.attributes == (frozenset({"g1"}), frozenset({"g2", "g3"}))


def test_attributes_full_coverage_is_identity(tmp_path):
    ds = Dataset.from_interactions([("u1", "i1", 1), ("u2", "i2", 2)])
    out = load_attributes(_write(tmp_path / "a.tsv", ["i1\tx", "i2\ty", "i9\tz"]), ds)
    assert out == ds.with_attributes(out.attributes)
    assert np.array_equal(out.ratings, ds.ratings)


def test_duplicate_feature_lines_dedup(tmp_path):
    ds = Dataset.from_interactions([("u1", "i1", 1)])
    out = load_attributes(_write(tmp_path / "a.tsv", ["i1\tx", "i1\tx", "i1\ty\tx"]), ds)
    assert out.attributes == (frozenset({"x", "y"}),)
    assert out.attribute_matrix().sum() == 2


def test_attribute_file_with_no_known_items(tmp_path):
    ds = Dataset.from_interactions([("u1", "i1", 1)])
    with pytest.raises(DatasetError, match="covers none"):
        load_attributes(_write(tmp_path / "a.tsv", ["zz\tx"]), ds)


def test_cluster_file(tmp_path):
    p = _write(tmp_path / "c.tsv", ["u1\tA", "u2\tB"])
    assert load_clusters(p) == {"u1": "A", "u2": "B"}
    with pytest.raises(DatasetError, match=":1:"):
        load_clusters(_write(tmp_path / "bad.tsv", ["u1"]))


def test_from_matrix_and_csr_round_trip():
    X = np.array([[0, 2, 0], [1, 0, 3]], dtype=float)
    ds = Dataset.from_matrix(X)
    assert np.array_equal(ds.to_csr().toarray(), X)
    assert ds.summary()["interactions"] == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_dataset_invariants(seed):
    ds = random_dataset(np.random.default_rng(seed))
    pairs = list(zip(ds.users.tolist(), ds.items.tolist()))
    assert len(set(pairs)) == len(pairs)
    assert ds.item_popularity.sum() == ds.n_interactions
    assert ds.user_profile_sizes.sum() == ds.n_interactions
    assert set(ds.users.tolist()) <= set(range(ds.n_users))
    assert set(ds.items.tolist()) <= set(range(ds.n_items))
    assert ds.user_index == {u: k for k, u in enumerate(ds.user_ids)}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_reload_is_byte_deterministic(tmp_path_factory, seed):
    d = tmp_path_factory.mktemp("reload")
    ds = random_dataset(np.random.default_rng(seed))
    write_interactions(ds, d / "a.tsv")
    first = load_dataset(str(d / "a.tsv"))
    second = load_dataset(str(d / "a.tsv"))
    assert first == second
    write_interactions(first, d / "b.tsv")
    assert (d / "a.tsv").read_bytes() == (d / "b.tsv").read_bytes()


def test_interaction_tuple_coercion():
    ds = Dataset.from_interactions([Interaction("a", "x", 2.0, 7), ("b", "x", 1.0, None)])
    assert ds.n_users == 2 and not ds.has_timestamps
