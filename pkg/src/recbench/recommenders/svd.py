from __future__ import annotations

import numpy as np
import scipy.linalg as la

from ..utils import check_positive_int, check_rng
from .base import BaseRecommender


def truncated_svd(A, rank, n_oversamples=10, min_iter=10, max_iter=300, tol=1e-6, rng=None):
    """Rank-``rank`` SVD of ``A`` by orthogonal (block power) iteration.

    Iterates ``Q <- orth(A^T A Q)`` on a block of ``rank + n_oversamples``
    columns for at least ``min_iter`` steps and until the subspace residual
    ``||(I - Q Q^T) A^T A Q|| / ||A^T A Q||`` drops below ``tol``, then
    extracts singular triplets by Rayleigh-Ritz on ``A Q``.

    Returns ``(U, s, Vt, n_iter, residual)``.
    """
    rng = check_rng(rng)
    m, n = A.shape
    rank = check_positive_int(rank, "rank")
    rank = min(rank, m, n)
    block = min(rank + n_oversamples, m, n)
    Q, _ = la.qr(rng.standard_normal((n, block)), mode="economic")
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Z = np.asarray(A.T @ (A @ Q))
        nz = np.linalg.norm(Z)
        residual = np.linalg.norm(Z - Q @ (Q.T @ Z)) / nz if nz > 0 else 0.0
        if nz == 0:
            break
        Q, _ = la.qr(Z, mode="economic")
        if it >= min_iter and residual < tol:
            break
    B = np.asarray(A @ Q)
    Ub, s, Wt = la.svd(B, full_matrices=False)
    V = Q @ Wt.T
    return Ub[:, :rank], s[:rank], V[:, :rank].T, it, residual


class PureSVD(BaseRecommender):
    """Truncated SVD of the rating matrix; scores are the low-rank reconstruction."""

    rating_capable = True

    def __init__(self, factors=10, random_state=42):
        self.factors = factors
        self.random_state = random_state

    def _fit(self, train):
        U, s, Vt, n_iter, res = truncated_svd(self._profiles, self.factors,
                                              rng=np.random.default_rng(self.random_state))
        self.user_factors_ = U * s
        self.singular_values_ = s
        self.item_factors_ = Vt.T
        self.n_iter_ = n_iter
        self.residual_ = res

    def _score(self, users):
        # R V V^T equals U S V^T on training rows and also covers new rows
        P = self._profiles[users] @ self.item_factors_
        return np.asarray(P) @ self.item_factors_.T

    def _predict(self, users, items):
        return np.einsum("kf,kf->k", self.user_factors_[users], self.item_factors_[items])
