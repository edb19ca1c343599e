"""Neighbourhood models over item-item or user-user similarity."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..similarity import KINDS, pairwise_similarity
from ..utils import check_positive_int
from .base import BaseRecommender


def top_neighbors(S, neighbors) -> sp.csr_matrix:
    """Keep, for every row of ``S``, its ``neighbors`` largest off-diagonal entries.

    Ties go to the lower column index; zero similarities are dropped.
    """
    S = np.array(S, dtype=np.float64)
    n = S.shape[0]
    np.fill_diagonal(S, -np.inf)
    k = min(neighbors, max(n - 1, 0))
    rows, cols, vals = [], [], []
    if k > 0:
        order = np.argsort(-S, axis=1, kind="stable")[:, :k]
        picked = np.take_along_axis(S, order, axis=1)
        keep = np.isfinite(picked) & (picked != 0)
        rows = np.repeat(np.arange(n), k)[keep.ravel()]
        cols = order.ravel()[keep.ravel()]
        vals = picked.ravel()[keep.ravel()]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


class _KNNBase(BaseRecommender):
    rating_capable = True

    def _check_params(self):
        check_positive_int(self.neighbors, "neighbors")
        if self.similarity not in KINDS:
            raise ValueError(f"unknown similarity {self.similarity!r}; valid: {', '.join(KINDS)}")


class ItemKNN(_KNNBase):
    """Item-based kNN: score(u, i) = sum over j in N(i) rated by u of sim(i, j) * r(u, j)."""

    def __init__(self, neighbors=40, similarity="cosine"):
        self.neighbors = neighbors
        self.similarity = similarity

    def _item_vectors(self, train):
        return self._profiles.T.tocsr()

    def _fit(self, train):
        self._check_params()
        S = pairwise_similarity(self._item_vectors(train), self.similarity)
        # row i holds the neighbours of i; scoring uses the transpose
        self.neighborhood_ = top_neighbors(S, self.neighbors)
        self._W = self.neighborhood_.T.tocsr()

    def _score(self, users):
        return (self._profiles[users] @ self._W).toarray()

    def _predict(self, users, items):
        R = self._profiles
        out = np.full(len(users), np.nan)
        N = self.neighborhood_
        for k, (u, i) in enumerate(zip(users.tolist(), items.tolist())):
            nb = N.indices[N.indptr[i]:N.indptr[i + 1]]
            w = N.data[N.indptr[i]:N.indptr[i + 1]]
            r = R[u, nb].toarray().ravel()
            rated = r != 0
            den = np.abs(w[rated]).sum()
            if rated.any() and den > 0:
                out[k] = float(w[rated] @ r[rated] / den)
        return out


class AttributeItemKNN(ItemKNN):
    """Item kNN whose similarity comes from binary item-feature vectors."""

    def fit(self, X, y=None, item_features=None):
        self._item_features = item_features
        return super().fit(X, y)

    def _item_vectors(self, train):
        F = self._item_features
        if F is None:
            if train.attributes is None:
                raise ValueError("AttributeItemKNN needs item attributes (side information)")
            F = train.attribute_matrix()
        F = sp.csr_matrix(F, dtype=np.float64)
        if F.shape[0] != train.n_items:
            raise ValueError(f"item_features has {F.shape[0]} rows, expected {train.n_items}")
        F.data = np.ones_like(F.data)
        return F


class UserKNN(_KNNBase):
    """User-based kNN: score(u, i) = sum over v in N(u) of sim(u, v) * r(v, i)."""

    def __init__(self, neighbors=40, similarity="cosine"):
        self.neighbors = neighbors
        self.similarity = similarity

    def _fit(self, train):
        self._check_params()
        S = pairwise_similarity(self._profiles, self.similarity)
        self.neighborhood_ = top_neighbors(S, self.neighbors)

    def _score(self, users):
        return (self.neighborhood_[users] @ self._profiles).toarray()

    def _predict(self, users, items):
        Rc = self._profiles.tocsc()
        N = self.neighborhood_
        out = np.full(len(users), np.nan)
        for k, (u, i) in enumerate(zip(users.tolist(), items.tolist())):
            nb = N.indices[N.indptr[u]:N.indptr[u + 1]]
            w = N.data[N.indptr[u]:N.indptr[u + 1]]
            r = Rc[nb, i].toarray().ravel()
            rated = r != 0
            den = np.abs(w[rated]).sum()
            if rated.any() and den > 0:
                out[k] = float(w[rated] @ r[rated] / den)
        return out
