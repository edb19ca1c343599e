from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from recbench.dataset import Dataset
from recbench.recommenders import (BPRMF, MODELS, AttributeItemKNN, ItemKNN, MostPopRecommender,
                                   PureSVD, RandomRecommender, UserKNN, make_model, rank_scores,
                                   truncated_svd)
from recbench.synthetic import group_structured, two_block

from instances import block_preference_share, finite_difference_check, random_dataset


def _ds(rows):
    return Dataset.from_interactions([(u, i, float(r)) for u, i, r in rows])


def _named(lists, ds, u):
    return [ds.item_ids[i] for i in lists[ds.user_index[u]].tolist()]


def test_most_pop_order_and_exclusion():
    ds = _ds([("u", "A", 1), ("v", "A", 1), ("v", "B", 1), ("w", "B", 1), ("x", "B", 1),
              ("w", "C", 1), ("z", "A", 1)])
    lists = MostPopRecommender().fit(ds).recommend(top_k=3)
    assert _named(lists, ds, "u") == ["B", "C"]
    assert _named(lists, ds, "z") == ["B", "C"]
    assert _named(lists, ds, "x") == ["A", "C"]


def test_most_pop_first_candidate():
    ds = _ds([("a", "i1", 1), ("b", "i1", 1), ("c", "i1", 1), ("d", "i2", 1)])
    lists = MostPopRecommender().fit(ds).recommend(top_k=1)
    assert _named(lists, ds, "d") == ["i1"]
    assert _named(lists, ds, "a") == ["i2"]


def test_random_covers_catalog():
    X = sp.csr_matrix((np.ones(1000), (np.arange(1000), np.arange(1000) % 500)), shape=(1000, 500))
    lists = RandomRecommender(random_state=0).fit(X).recommend(top_k=10)
    covered = {i for u in lists.users for i in lists[u].tolist()}
    assert len(covered) >= 495


def test_random_is_seeded():
    ds = random_dataset(np.random.default_rng(0), n_users=10, n_items=20)
    a = RandomRecommender(random_state=3).fit(ds).recommend(top_k=5)
    b = RandomRecommender(random_state=3).fit(ds).recommend(top_k=5)
    c = RandomRecommender(random_state=4).fit(ds).recommend(top_k=5)
    assert all(np.array_equal(a[u], b[u]) for u in a.users)
    assert any(not np.array_equal(a[u], c[u]) for u in a.users)


def test_item_knn_zero_score_fill_in_id_order():
    # u rates only item a; a has no neighbours, so every candidate scores 0
    ds = _ds([("u", "a", 1), ("v", "b", 1), ("v", "c", 1), ("w", "d", 1), ("w", "c", 1)])
    lists = ItemKNN(neighbors=5).fit(ds).recommend(top_k=3)
    u = ds.user_index["u"]
    assert _named(lists, ds, "u") == ["b", "c", "d"]
    assert lists.scores[u].tolist() == [0.0, 0.0, 0.0]


def test_knn_predict_weighted_mean():
    # item t is similar to x only; u rated x with 4
    X = np.array([[4, 0, 0], [1, 1, 0], [0, 0, 1]], dtype=float)
    m = ItemKNN(neighbors=1).fit(sp.csr_matrix(X))
    assert m.predict([0], [1]).tolist() == [4.0]
    # two neighbours with equal similarity, ratings 2 and 4
    X = np.array([[2, 4, 0], [1, 1, 1]], dtype=float)
    m = ItemKNN(neighbors=2, similarity="jaccard").fit(sp.csr_matrix(X))
    assert m.predict([0], [2]).tolist() == [3.0]
    assert np.isnan(MostPopRecommender().fit(sp.csr_matrix(X)).predict([0], [2])[0])


def _weighted_mean_oracle(N, R, u, i):
    num = den = 0.0
    for j in range(N.shape[1]):
        if N[i, j] != 0 and R[u, j] != 0:
            num += N[i, j] * R[u, j]
            den += abs(N[i, j])
    return num / den if den else float("nan")


def test_item_knn_predict_against_oracle():
    rng = np.random.default_rng(2)
    for _ in range(5):
        R = rng.integers(0, 6, size=(15, 12)).astype(float) * (rng.random((15, 12)) < 0.4)
        m = ItemKNN(neighbors=4, similarity="pearson").fit(sp.csr_matrix(R))
        N = m.neighborhood_.toarray()
        us, its = rng.integers(0, 15, 40), rng.integers(0, 12, 40)
        got = m.predict(us, its)
        want = [_weighted_mean_oracle(N, R, u, i) for u, i in zip(us, its)]
        np.testing.assert_allclose(got, want, atol=1e-12, equal_nan=True)


def test_item_knn_score_definition():
    rng = np.random.default_rng(3)
    R = rng.integers(0, 4, size=(10, 8)).astype(float) * (rng.random((10, 8)) < 0.5)
    m = ItemKNN(neighbors=3).fit(sp.csr_matrix(R))
    N = m.neighborhood_.toarray()
    assert (np.count_nonzero(N, axis=1) <= 3).all()
    want = R @ N.T  # score(u,i) = sum_j in N(i) sim(i,j) r(u,j)
    got = m._score(np.arange(10))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_user_knn_scores():
    rng = np.random.default_rng(4)
    R = rng.integers(0, 4, size=(10, 8)).astype(float) * (rng.random((10, 8)) < 0.5)
    R[0] = [1, 1, 0, 0, 0, 0, 0, 0]
    m = UserKNN(neighbors=2).fit(sp.csr_matrix(R))
    N = m.neighborhood_.toarray()
    np.testing.assert_allclose(m._score(np.arange(10)), N @ R, atol=1e-12)


def test_attribute_knn_uses_features():
    data = group_structured(n_users=40, n_items=50, mean_profile=8, seed=1)
    m = AttributeItemKNN(neighbors=10).fit(data.with_attributes())
    F = data.with_attributes().attribute_matrix().toarray()
    i, j = m.neighborhood_.nonzero()
    assert np.all((F[i] * F[j]).sum(axis=1) > 0)  # neighbours share a feature
    with pytest.raises(ValueError, match="attributes"):
        AttributeItemKNN().fit(random_dataset(np.random.default_rng(0)))


def test_pure_svd_rank_one_reconstruction():
    a, b = np.arange(1, 7, dtype=float), np.array([1.0, 0.5, 2.0, 3.0])
    X = np.outer(a, b)
    m = PureSVD(factors=1).fit(sp.csr_matrix(X))
    rec = m.user_factors_ @ m.item_factors_.T
    assert np.abs(rec - X).max() <= 1e-6
    np.testing.assert_allclose(m._score(np.arange(6)), X, atol=1e-6)


def test_truncated_svd_diagonal_matrix():
    d = np.array([9.0, 7.0, 5.0, 3.0, 1.0])
    U, s, Vt, _, _ = truncated_svd(sp.diags(d).tocsr(), 3, rng=np.random.default_rng(0))
    np.testing.assert_allclose(s, d[:3], atol=1e-6)


def test_truncated_svd_matches_lapack():
    rng = np.random.default_rng(5)
    A = rng.random((40, 30))
    _, s, _, _, _ = truncated_svd(sp.csr_matrix(A), 5, rng=rng)
    np.testing.assert_allclose(s, np.linalg.svd(A, compute_uv=False)[:5], rtol=1e-6)


def test_bpr_gradient_matches_finite_differences():
    assert finite_difference_check(np.random.default_rng(0), n_points=100) <= 1e-4


def test_bpr_two_block():
    ds = two_block(seed=0)
    m = BPRMF(factors=8, lr=0.05, epochs=30, reg=0.001, random_state=1).fit(ds)
    assert block_preference_share(m, 100, 80) >= 0.95


def test_bpr_hyperparameter_domains():
    ds = random_dataset(np.random.default_rng(0))
    for bad in ({"factors": 0}, {"epochs": 0}, {"lr": 0.0}, {"reg": -1.0}):
        with pytest.raises(ValueError):
            BPRMF(**bad).fit(ds)


@pytest.mark.parametrize("name", list(MODELS))
def test_exclusion_and_list_shape(name):
    data = group_structured(n_users=30, n_items=40, mean_profile=10, seed=2)
    ds = data.with_attributes()
    m = make_model(name).fit(ds)
    lists = m.recommend(top_k=7)
    R = ds.to_csr()
    for u in lists.users:
        lst = lists[u].tolist()
        assert len(lst) <= 7 and len(set(lst)) == len(lst)
        assert not set(lst) & set(R.indices[R.indptr[u]:R.indptr[u + 1]].tolist())
        sc = lists.scores[u]
        for r in range(len(lst) - 1):  # descending, ties by ascending item index
            assert sc[r] > sc[r + 1] or (sc[r] == sc[r + 1] and lst[r] < lst[r + 1])


@pytest.mark.parametrize("name", list(MODELS))
def test_fit_recommend_deterministic_across_threads(name):
    ds = group_structured(n_users=30, n_items=40, mean_profile=10, seed=3).with_attributes()

    def run(_):
        lists = make_model(name).fit(ds).recommend(top_k=5)
        return [(u, lists[u].tolist(), lists.scores[u].tolist()) for u in lists.users]

    serial = run(0)
    with ThreadPoolExecutor(4) as pool:
        assert all(r == serial for r in pool.map(run, range(4)))


def test_extra_exclusion_matrix():
    ds = _ds([("u", "a", 1), ("v", "a", 1), ("v", "b", 1)])
    m = MostPopRecommender().fit(ds)
    E = sp.csr_matrix(([1.0], ([0], [1])), shape=(2, 2))
    assert m.recommend(top_k=2, exclude=E)[0].tolist() == []
    with pytest.raises(ValueError, match="shape"):
        m.recommend(exclude=sp.csr_matrix((3, 3)))


def test_cold_user_gets_popularity_ranking():
    ds = Dataset.from_interactions([("a", "x", 1.0), ("a", "y", 1.0), ("b", "y", 1.0)],
                                   user_ids=["a", "b", "cold"])
    lists = ItemKNN().fit(ds).recommend(top_k=2)
    assert lists[2].tolist() == [1, 0]


def test_errors_and_params():
    with pytest.raises(NotFittedError):
        MostPopRecommender().recommend()
    ds = random_dataset(np.random.default_rng(0))
    with pytest.raises(ValueError, match="top_k"):
        MostPopRecommender().fit(ds).recommend(top_k=0)
    with pytest.raises(ValueError, match="unknown model"):
        make_model("NeuMF")
    with pytest.raises(ValueError):
        ItemKNN(similarity="hamming").fit(ds)
    m = clone(ItemKNN(neighbors=7, similarity="dice"))
    assert m.get_params() == {"neighbors": 7, "similarity": "dice"}


def test_rank_scores_tie_break_and_partial_path():
    s = np.array([1.0, 3.0, 3.0, 0.0] + [0.5] * 20)
    ex = np.zeros(len(s), dtype=bool)
    ex[2] = True
    assert rank_scores(s, ex, 3).tolist() == [1, 0, 4]
    full = np.lexsort((np.arange(len(s)), -np.where(ex, -np.inf, s)))[:3]
    assert rank_scores(s, ex, 3).tolist() == full.tolist()
