from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..dataset import Dataset

_BATCH = 512


def check_interactions(X) -> Dataset:
    """Coerce a Dataset, sparse matrix or 2-D array into a :class:`Dataset`."""
    if isinstance(X, Dataset):
        return X
    if sp.issparse(X) or isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D user x item matrix, got shape {X.shape}")
        return Dataset.from_matrix(X)
    raise TypeError(f"expected Dataset or user x item matrix, got {type(X).__name__}")


@dataclass(frozen=True)
class RecommendationLists:
    """Per-user ranked items (dense indices) with their scores, best first."""

    items: dict
    scores: dict
    user_ids: tuple = ()
    item_ids: tuple = ()

    @property
    def users(self):
        return sorted(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, user):
        return self.items[user]

    def truncate(self, k) -> "RecommendationLists":
        return RecommendationLists({u: v[:k] for u, v in self.items.items()},
                                   {u: v[:k] for u, v in self.scores.items()},
                                   self.user_ids, self.item_ids)

    def rows(self):
        """(user id, item id, score) rows ordered by user id then rank."""
        order = sorted(self.items, key=lambda u: self.user_ids[u] if self.user_ids else u)
        for u in order:
            uid = self.user_ids[u] if self.user_ids else str(u)
            for i, s in zip(self.items[u].tolist(), self.scores[u].tolist()):
                yield uid, (self.item_ids[i] if self.item_ids else str(i)), s


def rank_scores(scores, exclude, top_k):
    """Indices of the ``top_k`` best scores; ties go to the lower index.

    ``exclude`` is a boolean mask of candidates to drop.
    """
    s = np.where(exclude, -np.inf, scores)
    n_cand = int(np.count_nonzero(~exclude))
    k = min(top_k, n_cand)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k < len(s) // 4:
        # the k-th best value bounds the candidates that need a full sort
        kth = np.partition(-s, k - 1)[k - 1]
        cand = np.flatnonzero(-s <= kth)
        order = cand[np.lexsort((cand, -s[cand]))]
    else:
        order = np.lexsort((np.arange(len(s)), -s))
    return order[:k].astype(np.int64)


class BaseRecommender(BaseEstimator):
    """Common fit/recommend surface.

    Subclasses implement ``_fit(train)`` and ``_score(users)`` returning a
    dense ``(len(users), n_items)`` score block.  Rating-capable models also
    override ``_predict``.
    """

    rating_capable = False

    def fit(self, X, y=None):
        train = check_interactions(X)
        self.train_ = train
        self.n_users_, self.n_items_ = train.n_users, train.n_items
        self._profiles = train.to_csr()
        self._popularity = train.item_popularity.astype(np.float64)
        self._fit(train)
        return self

    def _fit(self, train):
        raise NotImplementedError

    def _score(self, users):
        raise NotImplementedError

    def _check_fitted(self):
        if not hasattr(self, "train_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def score_users(self, users) -> np.ndarray:
        """Dense score block; users without training interactions get popularity scores."""
        self._check_fitted()
        users = np.asarray(users, dtype=np.int64)
        scores = np.asarray(self._score(users), dtype=np.float64)
        cold = np.diff(self._profiles.indptr)[users] == 0
        if cold.any():
            scores[cold] = self._popularity
        return scores

    def recommend(self, users=None, top_k=10, exclude_train=True,
                  exclude=None) -> RecommendationLists:
        """Rank the full catalog (minus training items) for each user.

        ``exclude`` is an optional extra user x item sparse matrix whose
        non-zero entries are also withheld from the lists.
        """
        self._check_fitted()
        if top_k <= 0:
            raise ValueError(f"top_k must be positive, got {top_k}")
        if users is None:
            users = np.arange(self.n_users_)
        users = np.asarray(users, dtype=np.int64)
        items, scores = {}, {}
        R = self._profiles
        E = None if exclude is None else sp.csr_matrix(exclude)
        if E is not None and E.shape != R.shape:
            raise ValueError(f"exclude has shape {E.shape}, expected {R.shape}")
        for start in range(0, len(users), _BATCH):
            batch = users[start:start + _BATCH]
            block = self.score_users(batch)
            for row, u in enumerate(batch.tolist()):
                mask = np.zeros(self.n_items_, dtype=bool)
                if exclude_train:
                    mask[R.indices[R.indptr[u]:R.indptr[u + 1]]] = True
                if E is not None:
                    mask[E.indices[E.indptr[u]:E.indptr[u + 1]]] = True
                top = rank_scores(block[row], mask, top_k)
                items[u] = top
                scores[u] = block[row][top]
        return RecommendationLists(items, scores, self.train_.user_ids, self.train_.item_ids)

    def predict(self, users, items) -> np.ndarray:
        """Predicted ratings for (user, item) pairs; nan where unavailable."""
        self._check_fitted()
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        if not self.rating_capable:
            return np.full(len(users), np.nan)
        return self._predict(users, items)

    def _predict(self, users, items):
        return np.full(len(users), np.nan)
